#include "ofdmest/cli.hpp"

#include "ofdmest/estimators.hpp"
#include "ofdmest/harness.hpp"
#include "ofdmest/io.hpp"
#include "ofdmest/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace ofdmest::cli {

using nlohmann::json;

namespace {

json optional_int(const std::optional<int>& v)
{
    return v ? json(*v) : json(nullptr);
}

json report_to_json(const EstimationReport& r, double sample_rate_hz)
{
    json j;
    j["method_used"] = std::string(to_string(r.method_used));
    j["failed"] = r.failed();
    j["failure"] = r.failure ? json(*r.failure) : json(nullptr);
    j["n_s_hat"] = optional_int(r.n_s_hat);
    j["n_u_hat"] = optional_int(r.n_u_hat);
    j["q_hat"] = optional_int(r.q_hat);
    j["n_cn_hat"] = optional_int(r.n_cn_hat);
    j["n_os_hat"] = optional_int(r.n_os_hat);
    j["sample_rate_hz"] = sample_rate_hz;
    j["symbol_rate_hz"] = r.n_s_hat ? json(sample_rate_hz / *r.n_s_hat) : json(nullptr);
    j["useful_symbol_time_s"] = r.n_u_hat ? json(*r.n_u_hat / sample_rate_hz) : json(nullptr);
    j["traversal_candidates"] = r.traversal_candidates;
    return j;
}

int cmd_synth(const std::string& config_path, const std::string& out_path, std::ostream& out)
{
    const auto cfg = io::read_config(config_path);
    const auto generated = synth::generate_ofdm(cfg);
    io::write_iq(out_path, generated.signal);
    io::IqFileMeta meta;
    meta.sample_rate_hz = generated.signal.sample_rate_hz();
    meta.truth = cfg;
    const auto meta_path = io::meta_path_for(out_path);
    io::write_meta(meta_path, meta);
    out << "wrote " << generated.signal.size() << " samples to " << out_path << " (metadata " << meta_path.string()
        << ")\n";
    return kExitOk;
}

struct EstimateOptions {
    std::string in_path;
    std::string method{"auto"};
    std::optional<double> snr_hint;
    std::optional<std::uint64_t> seed;
    std::optional<int> search_max;
    std::optional<int> autocorr_window;
    std::optional<int> sliding_window;
    int ns_min{120};
    int ns_max{200};
};

int cmd_estimate(const EstimateOptions& opt, std::ostream& out)
{
    io::IqFileMeta meta;
    auto signal = io::read_recording(opt.in_path, &meta);

    EstimatorSettings settings;
    settings.autocorr_search_max = opt.search_max;
    settings.autocorr_window = opt.autocorr_window;
    settings.sliding_window = opt.sliding_window;
    settings.traversal.n_min = opt.ns_min;
    settings.traversal.n_max = opt.ns_max;
    settings.traversal.validate();

    Method method = Method::hybrid;
    if (opt.method != "auto") method = *parse_method(opt.method);

    const double rate = signal.sample_rate_hz();
    BlindAnalyzer analyzer(std::move(signal), settings);
    const auto report = analyzer.run(method, opt.snr_hint.value_or(0.0));
    auto j = report_to_json(report, rate);
    j["snr_hint_db"] = opt.snr_hint ? json(*opt.snr_hint) : json(nullptr);
    if (opt.seed) j["seed"] = *opt.seed;
    out << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_csv, std::optional<std::uint64_t> seed,
              std::optional<unsigned> workers, std::ostream& out)
{
    auto spec = io::read_sweep_spec(spec_path);
    if (seed) spec.seed = *seed;
    if (workers) spec.workers = *workers;

    const auto rows = harness::run_sweep(spec, [&](double snr, const std::vector<harness::SweepRow>& point) {
        out << "snr_db=" << harness::format_real(snr);
        for (const auto& r : point) {
            out << ' ' << to_string(r.method) << '/' << harness::to_string(r.parameter)
                << "=" << harness::format_real(r.accuracy);
        }
        out << '\n' << std::flush;
    });

    std::ofstream csv(out_csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw io::IoError("cannot open '" + out_csv + "' for writing");
    harness::write_csv(csv, rows);
    if (!csv) throw io::IoError("write failed for '" + out_csv + "'");
    out << "wrote " << rows.size() << " rows to " << out_csv << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Blind OFDM symbol-length, oversampling and carrier-count estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Synthesize an OFDM recording over AWGN");
    synth->add_option("--config", config_path, "JSON config file")->required();
    synth->add_option("--out", synth_out, "Output IQ file (cf32le); sidecar written next to it")->required();

    EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate", "Estimate OFDM parameters from a recording");
    estimate->add_option("--in", est.in_path, "Input IQ file with .meta.json sidecar")->required();
    estimate->add_option("--method", est.method, "Estimation route")
        ->check(CLI::IsMember({"auto", "autocorr", "sliding", "traversal", "substitution"}));
    estimate->add_option("--snr-hint", est.snr_hint, "SNR hint in dB for the auto route (default 0)");
    estimate->add_option("--seed", est.seed, "Recorded in the report; estimation is deterministic");
    estimate->add_option("--search-max", est.search_max, "Largest lag searched for the useful length");
    estimate->add_option("--autocorr-window", est.autocorr_window, "Samples excluded from the lag sum");
    estimate->add_option("--sliding-window", est.sliding_window, "Sliding CP window length");
    estimate->add_option("--ns-min", est.ns_min, "Smallest baseband symbol length traversed");
    estimate->add_option("--ns-max", est.ns_max, "Traversal stops before this length");

    std::string spec_path;
    std::string sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<unsigned> sweep_workers;
    auto* sweep = app.add_subcommand("sweep", "Run a Monte-Carlo SNR sweep and write CSV");
    sweep->add_option("--spec", spec_path, "JSON sweep spec")->required();
    sweep->add_option("--out", sweep_out, "Output CSV path")->required();
    sweep->add_option("--seed", sweep_seed, "Master seed (overrides the spec)");
    sweep->add_option("--workers", sweep_workers, "Worker threads (0 = hardware concurrency)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth) return cmd_synth(config_path, synth_out, out);
        if (*estimate) return cmd_estimate(est, out);
        if (*sweep) return cmd_sweep(spec_path, sweep_out, sweep_seed, sweep_workers, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace ofdmest::cli
