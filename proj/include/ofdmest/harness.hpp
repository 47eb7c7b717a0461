#pragma once

#include "ofdmest/core.hpp"
#include "ofdmest/estimators.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace ofdmest::harness {

enum class Parameter { n_s, n_u, n_cn, q };

std::string_view to_string(Parameter p);

/// Parameters a method reports, in CSV row order.
const std::vector<Parameter>& parameters_for(Method m);

/// Ground truth every trial is scored against.
struct Truth {
    int n_s{0};
    int n_u{0};
    int n_cn{0};
    int q{0};

    static Truth from_config(const OfdmConfig& cfg);
    int value(Parameter p) const;
};

struct ParameterScore {
    bool hit{false};
    double ae{1.0};
    bool missing{true};
};

/// hit <=> |estimate - truth| <= tolerance; ae = |estimate - truth| / truth.
/// A missing estimate scores (miss, 1.0).
ParameterScore score_estimate(std::optional<int> estimate, int truth, int tolerance);

std::optional<int> estimate_of(const EstimationReport& report, Parameter p);

struct PointSummary {
    double accuracy{0.0};
    /// Mean AE over all trials, failures included at 1.0.
    double amplitude_error{0.0};
    int trials{0};
    int failures{0};
};

PointSummary summarize(const std::vector<ParameterScore>& scores);

struct TrialScore {
    Parameter parameter;
    ParameterScore score;
};

std::vector<TrialScore> score_trial(const EstimationReport& report, const Truth& truth, int tolerance);

struct SweepSpec {
    OfdmConfig base_config{};
    std::vector<double> snr_grid_db;
    int trials_per_point{200};
    std::vector<Method> methods;
    int exact_match_tolerance{0};
    std::uint64_t seed{1};
    /// Estimator configuration; truth-aided defaults when unset.
    std::optional<EstimatorSettings> settings;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned workers{0};

    void validate() const;
};

struct SweepRow {
    double snr_db{0.0};
    Method method{Method::hybrid};
    Parameter parameter{Parameter::n_s};
    double accuracy{0.0};
    double amplitude_error{0.0};
    int trials{0};
    int failures{0};
};

/// Estimator settings derived from known truth: lag search bound 2.5 N_u,
/// window L_M/2, sliding window N_g, traversal over [0.75, 1.25] x N_s at
/// baseband.
EstimatorSettings truth_aided_settings(const OfdmConfig& cfg);

/// Trial seed: a pure function of (master seed, SNR index, trial index).
std::uint64_t trial_seed(std::uint64_t master, std::size_t snr_index, std::size_t trial_index);

using PointCallback = std::function<void(double snr_db, const std::vector<SweepRow>& rows)>;

/// Runs every (SNR, trial) and returns one row per (SNR, method, parameter).
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PointCallback& on_point = {});

inline constexpr std::string_view kCsvHeader = "snr_db,method,parameter,accuracy,amplitude_error,trials,failures";

/// Six significant digits; non-finite values print as inf / -inf / nan.
std::string format_real(double v);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace ofdmest::harness
