#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ofdmest {

using cdouble = std::complex<double>;

// Error taxonomy shared by every module.

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EstimationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The buffer holds fewer samples than an operation's window needs.
class BufferTooShort : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Generation parameters for a synthetic OFDM capture.
///
/// All lengths derived from this config count samples at the receiver rate,
/// i.e. after oversampling by `oversampling_rate`.
struct OfdmConfig {
    int carrier_count{128};
    double cp_ratio{0.25};
    int oversampling_rate{1};
    int symbol_count{20};
    double carrier_freq_hz{0.0};
    double sample_rate_hz{40e6};
    /// +infinity means noiseless.
    double snr_db{std::numeric_limits<double>::infinity()};
    std::uint64_t seed{1};

    bool noiseless() const { return !std::isfinite(snr_db) && snr_db > 0; }

    /// Throws InvalidConfig when any field violates its invariant.
    void validate() const;
};

/// Sample counts of one OFDM symbol at the receiver rate.
struct SymbolLengths {
    int n_u{0};
    int n_g{0};
    int n_s{0};

    friend bool operator==(const SymbolLengths&, const SymbolLengths&) = default;
};

SymbolLengths derive_lengths(const OfdmConfig& cfg);

/// Complex baseband samples together with their sample rate.
class IqBuffer {
public:
    IqBuffer(std::vector<cdouble> samples, double sample_rate_hz);

    std::span<const cdouble> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double sample_rate_hz() const { return sample_rate_hz_; }
    const cdouble& operator[](std::size_t i) const { return samples_[i]; }

    /// Mean of |x|^2.
    double mean_power() const;

    /// Copy of the first `n` samples (n clamped to size()).
    IqBuffer head(std::size_t n) const;

private:
    std::vector<cdouble> samples_;
    double sample_rate_hz_;
};

enum class AbscissaKind { lag, position, frequency_bin };

struct CorrelationProfile {
    std::vector<double> values;
    AbscissaKind abscissa_kind{AbscissaKind::lag};

    CorrelationProfile() = default;
    CorrelationProfile(std::vector<double> v, AbscissaKind kind);

    std::size_t size() const { return values.size(); }
};

/// Strictly increasing peak abscissas (bin or sample indices).
class PeakSet {
public:
    PeakSet() = default;
    explicit PeakSet(std::vector<int> abscissas);

    const std::vector<int>& abscissas() const { return abscissas_; }
    int count() const { return static_cast<int>(abscissas_.size()); }
    bool empty() const { return abscissas_.empty(); }

private:
    std::vector<int> abscissas_;
};

struct ProgressionResult {
    int n_use{0};
    int n_all{0};
    int spacing{0};

    friend bool operator==(const ProgressionResult&, const ProgressionResult&) = default;
};

enum class Method { autocorr, sliding, traversal, substitution, hybrid };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct EstimationReport {
    std::optional<int> n_s_hat;
    std::optional<int> n_u_hat;
    std::optional<int> q_hat;
    std::optional<int> n_cn_hat;
    std::optional<int> n_os_hat;
    Method method_used{Method::hybrid};
    /// Candidate symbol lengths retained by the traversal, ascending.
    std::vector<int> traversal_candidates;
    /// Set when any stage could not produce an estimate.
    std::optional<std::string> failure;

    bool failed() const { return failure.has_value(); }
};

/// Search bounds and acceptance rule for the symbol-length traversal.
struct TraversalParams {
    int n_min{120};
    int n_max{200};
    int n_o{6};
    double majority_threshold{0.5};
    /// Candidate needs at least this many detected peaks.
    int min_peak_count{4};
    /// Compare the peak count against n_min instead of min_peak_count.
    bool literal_peak_predicate{false};
    /// Lag of the segment products; 0 averages instantaneous power.
    int segment_lag{0};

    void validate() const;
};

bool is_power_of_two(long long v);

}  // namespace ofdmest
