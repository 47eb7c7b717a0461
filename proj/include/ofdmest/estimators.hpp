#pragma once

#include "ofdmest/core.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ofdmest {

/// What counts as a peak in a correlation profile or spectrum.
struct PeakDetectParams {
    /// Peak must reach this fraction of the reference maximum.
    double min_prominence_ratio{0.3};
    /// Surviving peaks are at least this many bins apart; the larger one wins.
    int min_separation{2};
    /// Drop bin 0, and leave it out of the reference maximum.
    bool exclude_dc{true};
    /// Treat the profile as periodic (frequency bins wrap around).
    bool circular{false};
    /// Peak must also reach this multiple of the profile median; 0 disables.
    double min_floor_ratio{0.0};

    void validate() const;

    /// Segment-average spectra: DC excluded, 30% of the largest non-DC bin.
    static PeakDetectParams segment_spectrum();
    /// Lag-product PSD: circular, DC kept, lines must clear the median floor.
    static PeakDetectParams lag_psd();
    /// Sliding CP profile: one peak per symbol, so peaks are at least n_u apart.
    static PeakDetectParams sliding(int n_u);
};

PeakSet detect_peaks(const CorrelationProfile& profile, const PeakDetectParams& params);

/// Best arithmetic progression among the peak abscissas.
///
/// Pairs are drawn from the first half of the list; a pair closer than 4 bins
/// is ignored. From the second member the progression is extended by its
/// spacing up to the last peak, counting candidates within +-1 bin of a
/// detected peak. The first pair reaching the highest count wins.
ProgressionResult progression_stats(const PeakSet& peaks);

/// Arg-max of the normalized lag correlation over k in [min_lag, search_max].
///
/// Ties go to the smallest lag. For oversampled input pass min_lag = q so
/// the main lobe around k = 0 is skipped.
int estimate_nu_autocorr(const IqBuffer& signal, int search_max, int window, int min_lag = 1);

/// Total symbol length from the sliding CP profile at lag n_u, as a
/// multiple of `quantum` (the oversampling rate when known).
int estimate_ns_sliding(const IqBuffer& signal, int n_u, int window, int quantum = 1);

/// Period of a train of peak positions.
///
/// The median adjacent spacing gives a coarse period. Peaks within coarse/16
/// of the best-anchored lattice are fitted by least squares and the slope is
/// rounded to a multiple of `quantum`. Throws EstimationFailed with fewer than two peaks, or when fewer
/// than two thirds of the peaks sit on the lattice.
int symbol_length_from_peaks(const PeakSet& peaks, int quantum = 1);

struct TraversalCandidate {
    int n_p{0};
    ProgressionResult stats;
    bool qualified{false};
};

struct TraversalResult {
    int n_s{0};
    /// Retained candidates (the contiguous run that ended the search).
    std::vector<int> retained;
    /// Every candidate evaluated, in ascending n_p.
    std::vector<TraversalCandidate> evaluated;
};

/// Symbol length by traversing candidate lengths and testing the
/// segment-average spectrum for an arithmetic progression of spacing n_o.
TraversalResult estimate_ns_traversal(const IqBuffer& signal, const TraversalParams& params,
                                      const PeakDetectParams& detect = PeakDetectParams::segment_spectrum());

/// Mean of a contiguous candidate run, rounded half up.
int mean_of_candidates(const std::vector<int>& candidates);

/// Oversampling rate from the line spacing of the lag-1 PSD.
///
/// A spectrum with no qualifying lines is treated as not oversampled (q = 1).
int estimate_oversampling(const IqBuffer& signal,
                          const PeakDetectParams& detect = PeakDetectParams::lag_psd());

/// Largest power of two not above the baseband symbol length.
int carriers_from_symbol_length(int n_os);

struct EstimatorSettings {
    TraversalParams traversal{};
    PeakDetectParams segment_peaks{PeakDetectParams::segment_spectrum()};
    PeakDetectParams psd_peaks{PeakDetectParams::lag_psd()};
    /// Defaults to L_M/2 - 1 when unset.
    std::optional<int> autocorr_search_max;
    /// Defaults to L_M/2 when unset.
    std::optional<int> autocorr_window;
    /// Defaults to n_u/4 when unset.
    std::optional<int> sliding_window;
    /// Hints below this use the traversal/substitution route.
    double hybrid_switch_db{-5.0};
};

/// Oversampling rate, decimation, traversal, then carriers and useful length.
EstimationReport estimate_carriers_substitution(const IqBuffer& signal, const EstimatorSettings& settings = {});

/// Routes on the SNR hint: traversal + substitution below the switch point,
/// the autocorrelation and sliding-window estimators at or above it.
EstimationReport estimate_hybrid(const IqBuffer& signal, double snr_hint_db, const EstimatorSettings& settings = {});

/// Runs the estimation stages on one capture, computing each at most once.
///
/// Stage failures are remembered and surface as a report's failure message.
class BlindAnalyzer {
public:
    BlindAnalyzer(IqBuffer signal, EstimatorSettings settings);

    const IqBuffer& signal() const { return signal_; }
    const EstimatorSettings& settings() const { return settings_; }

    EstimationReport run(Method method, double snr_hint_db = 0.0);

private:
    template <class T>
    using Stage = std::optional<std::variant<T, std::string>>;

    const std::variant<int, std::string>& oversampling();
    const std::variant<TraversalResult, std::string>& traversal();
    const std::variant<int, std::string>& useful_length();
    const std::variant<int, std::string>& symbol_length_sliding();

    EstimationReport autocorr_report();
    EstimationReport sliding_report();
    EstimationReport traversal_report();
    EstimationReport substitution_report();
    EstimationReport hybrid_report(double snr_hint_db);

    IqBuffer signal_;
    EstimatorSettings settings_;
    Stage<int> q_;
    Stage<TraversalResult> traversal_;
    Stage<int> n_u_;
    Stage<int> n_s_sliding_;
};

}  // namespace ofdmest
