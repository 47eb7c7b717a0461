#include "ofdmest/harness.hpp"

#include "ofdmest/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace ofdmest::harness {

std::string_view to_string(Parameter p)
{
    switch (p) {
    case Parameter::n_s: return "n_s";
    case Parameter::n_u: return "n_u";
    case Parameter::n_cn: return "n_cn";
    case Parameter::q: return "q";
    }
    return "unknown";
}

const std::vector<Parameter>& parameters_for(Method m)
{
    static const std::vector<Parameter> autocorr{Parameter::n_u};
    static const std::vector<Parameter> symbol_length{Parameter::n_s};
    static const std::vector<Parameter> substitution{Parameter::n_u, Parameter::n_cn, Parameter::q};
    static const std::vector<Parameter> hybrid{Parameter::n_s, Parameter::n_u, Parameter::n_cn, Parameter::q};
    switch (m) {
    case Method::autocorr: return autocorr;
    case Method::sliding:
    case Method::traversal: return symbol_length;
    case Method::substitution: return substitution;
    case Method::hybrid: return hybrid;
    }
    return hybrid;
}

Truth Truth::from_config(const OfdmConfig& cfg)
{
    const auto lengths = derive_lengths(cfg);
    return {lengths.n_s, lengths.n_u, cfg.carrier_count, cfg.oversampling_rate};
}

int Truth::value(Parameter p) const
{
    switch (p) {
    case Parameter::n_s: return n_s;
    case Parameter::n_u: return n_u;
    case Parameter::n_cn: return n_cn;
    case Parameter::q: return q;
    }
    return 0;
}

ParameterScore score_estimate(std::optional<int> estimate, int truth, int tolerance)
{
    if (truth <= 0) throw std::invalid_argument("truth must be positive");
    if (!estimate) return {};
    const int err = std::abs(*estimate - truth);
    return {err <= tolerance, static_cast<double>(err) / truth, false};
}

std::optional<int> estimate_of(const EstimationReport& report, Parameter p)
{
    switch (p) {
    case Parameter::n_s: return report.n_s_hat;
    case Parameter::n_u: return report.n_u_hat;
    case Parameter::n_cn: return report.n_cn_hat;
    case Parameter::q: return report.q_hat;
    }
    return std::nullopt;
}

std::vector<TrialScore> score_trial(const EstimationReport& report, const Truth& truth, int tolerance)
{
    std::vector<TrialScore> out;
    for (Parameter p : parameters_for(report.method_used)) {
        out.push_back({p, score_estimate(estimate_of(report, p), truth.value(p), tolerance)});
    }
    return out;
}

void SweepSpec::validate() const
{
    base_config.validate();
    if (snr_grid_db.empty()) throw InvalidConfig("snr_grid_db must not be empty");
    if (!std::is_sorted(snr_grid_db.begin(), snr_grid_db.end())) {
        throw InvalidConfig("snr_grid_db must be sorted ascending");
    }
    for (double s : snr_grid_db) {
        if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
            throw InvalidConfig("snr_grid_db entries must be finite or +inf");
        }
    }
    if (trials_per_point < 1) throw InvalidConfig("trials_per_point must be >= 1");
    if (methods.empty()) throw InvalidConfig("methods must not be empty");
    if (exact_match_tolerance < 0) throw InvalidConfig("exact_match_tolerance must be >= 0");
}

EstimatorSettings truth_aided_settings(const OfdmConfig& cfg)
{
    const auto lengths = derive_lengths(cfg);
    const int total = cfg.symbol_count * lengths.n_s;
    const int window = total / 2;

    EstimatorSettings s;
    s.autocorr_window = window;
    s.autocorr_search_max = std::min(static_cast<int>(std::lround(2.5 * lengths.n_u)), window - 1);
    s.sliding_window = lengths.n_g;

    const double baseband_ns = static_cast<double>(lengths.n_s) / cfg.oversampling_rate;
    s.traversal.n_min = std::max(1, static_cast<int>(std::floor(0.75 * baseband_ns)));
    s.traversal.n_max = std::max(s.traversal.n_min + 1, static_cast<int>(std::ceil(1.25 * baseband_ns)));
    return s;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t snr_index, std::size_t trial_index)
{
    return synth::derive_seed(synth::derive_seed(master, snr_index), trial_index);
}

PointSummary summarize(const std::vector<ParameterScore>& scores)
{
    PointSummary out;
    out.trials = static_cast<int>(scores.size());
    if (scores.empty()) return out;
    int hits = 0;
    double ae_sum = 0.0;
    for (const auto& s : scores) {
        hits += s.hit ? 1 : 0;
        ae_sum += s.ae;
        out.failures += s.missing ? 1 : 0;
    }
    out.accuracy = static_cast<double>(hits) / out.trials;
    out.amplitude_error = ae_sum / out.trials;
    return out;
}

namespace {

struct TrialOutcome {
    // One entry per (method, parameter) cell in row order.
    std::vector<ParameterScore> cells;
};

TrialOutcome run_trial(const SweepSpec& spec, const EstimatorSettings& settings, const Truth& truth,
                       std::size_t snr_index, std::size_t trial_index)
{
    OfdmConfig cfg = spec.base_config;
    cfg.snr_db = spec.snr_grid_db[snr_index];
    cfg.seed = trial_seed(spec.seed, snr_index, trial_index);
    auto generated = synth::generate_ofdm(cfg);

    BlindAnalyzer analyzer(std::move(generated.signal), settings);
    TrialOutcome outcome;
    for (Method m : spec.methods) {
        const auto report = analyzer.run(m, cfg.snr_db);
        for (const auto& ts : score_trial(report, truth, spec.exact_match_tolerance)) {
            outcome.cells.push_back(ts.score);
        }
    }
    return outcome;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PointCallback& on_point)
{
    spec.validate();
    const Truth truth = Truth::from_config(spec.base_config);
    const EstimatorSettings settings = spec.settings.value_or(truth_aided_settings(spec.base_config));
    const auto trials = static_cast<std::size_t>(spec.trials_per_point);

    unsigned workers = spec.workers != 0 ? spec.workers : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));

    std::vector<SweepRow> rows;
    for (std::size_t si = 0; si < spec.snr_grid_db.size(); ++si) {
        std::vector<TrialOutcome> outcomes(trials);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t t = next++; t < trials; t = next++) {
                outcomes[t] = run_trial(spec, settings, truth, si, t);
            }
        };
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        }

        std::vector<SweepRow> point_rows;
        std::size_t cell = 0;
        for (Method m : spec.methods) {
            for (Parameter p : parameters_for(m)) {
                SweepRow row;
                row.snr_db = spec.snr_grid_db[si];
                row.method = m;
                row.parameter = p;
                std::vector<ParameterScore> column;
                column.reserve(outcomes.size());
                for (const auto& o : outcomes) column.push_back(o.cells[cell]);
                const auto summary = summarize(column);
                row.trials = summary.trials;
                row.accuracy = summary.accuracy;
                row.amplitude_error = summary.amplitude_error;
                row.failures = summary.failures;
                point_rows.push_back(row);
                ++cell;
            }
        }
        if (on_point) on_point(spec.snr_grid_db[si], point_rows);
        rows.insert(rows.end(), point_rows.begin(), point_rows.end());
    }
    return rows;
}

std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
    return buf;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << format_real(r.snr_db) << ',' << ofdmest::to_string(r.method) << ',' << to_string(r.parameter)
            << ',' << format_real(r.accuracy) << ',' << format_real(r.amplitude_error) << ',' << r.trials
            << ',' << r.failures << '\n';
    }
}

}  // namespace ofdmest::harness
