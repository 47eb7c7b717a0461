#include "ofdmest/harness.hpp"
#include "ofdmest/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace ofdmest;
using namespace ofdmest::harness;

TEST_CASE("score_estimate")
{
    auto s = score_estimate(160, 160, 0);
    CHECK(s.hit);
    CHECK(s.ae == 0.0);
    CHECK_FALSE(s.missing);

    s = score_estimate(176, 160, 0);
    CHECK_FALSE(s.hit);
    CHECK(s.ae == doctest::Approx(0.1));

    s = score_estimate(158, 160, 2);
    CHECK(s.hit);

    s = score_estimate(std::nullopt, 160, 0);
    CHECK_FALSE(s.hit);
    CHECK(s.ae == 1.0);
    CHECK(s.missing);
}

TEST_CASE("summarize")
{
    std::vector<ParameterScore> scores;
    for (int est : {160, 160, 158, 160}) scores.push_back(score_estimate(est, 160, 0));
    const auto p = summarize(scores);
    CHECK(p.trials == 4);
    CHECK(p.accuracy == doctest::Approx(0.75));
    CHECK(p.amplitude_error == doctest::Approx(0.003125));
    CHECK(p.failures == 0);

    scores.push_back(score_estimate(std::nullopt, 160, 0));
    const auto with_failure = summarize(scores);
    CHECK(with_failure.failures == 1);
    CHECK(with_failure.amplitude_error == doctest::Approx((0.0125 + 1.0) / 5.0));
}

TEST_CASE("score_trial follows the method's parameters")
{
    EstimationReport r;
    r.method_used = Method::substitution;
    r.q_hat = 4;
    r.n_cn_hat = 128;
    r.n_u_hat = 512;
    OfdmConfig cfg;
    cfg.oversampling_rate = 4;
    const auto truth = Truth::from_config(cfg);
    CHECK(truth.n_s == 640);
    CHECK(truth.n_u == 512);
    const auto scored = score_trial(r, truth, 0);
    REQUIRE(scored.size() == 3);
    for (const auto& ts : scored) CHECK(ts.score.hit);

    r.method_used = Method::hybrid;
    const auto hybrid = score_trial(r, truth, 0);
    REQUIRE(hybrid.size() == 4);
    CHECK(hybrid[0].parameter == Parameter::n_s);
    CHECK(hybrid[0].score.missing);
}

TEST_CASE("parameters per method")
{
    CHECK(parameters_for(Method::autocorr) == std::vector<Parameter>{Parameter::n_u});
    CHECK(parameters_for(Method::sliding) == std::vector<Parameter>{Parameter::n_s});
    CHECK(parameters_for(Method::traversal) == std::vector<Parameter>{Parameter::n_s});
    CHECK(parameters_for(Method::substitution).size() == 3);
    CHECK(parameters_for(Method::hybrid).size() == 4);
}

TEST_CASE("truth-aided settings")
{
    OfdmConfig cfg;
    const auto s = truth_aided_settings(cfg);
    CHECK(s.autocorr_window == 1600);
    CHECK(s.autocorr_search_max == 320);
    CHECK(s.sliding_window == 32);
    CHECK(s.traversal.n_min == 120);
    CHECK(s.traversal.n_max == 200);
}

TEST_CASE("noiseless sweep point is exact for every method")
{
    SweepSpec spec;
    spec.snr_grid_db = {std::numeric_limits<double>::infinity()};
    spec.trials_per_point = 50;
    spec.methods = {Method::autocorr, Method::sliding, Method::traversal, Method::substitution, Method::hybrid};
    spec.workers = 1;
    const auto rows = run_sweep(spec);
    CHECK(rows.size() == 1 + 1 + 1 + 3 + 4);
    for (const auto& r : rows) {
        INFO(to_string(r.method), "/", to_string(r.parameter));
        CHECK(r.accuracy == 1.0);
        CHECK(r.amplitude_error == 0.0);
        CHECK(r.failures == 0);
        CHECK(r.trials == 50);
    }
}

TEST_CASE("sweep row count and point callback")
{
    SweepSpec spec;
    spec.snr_grid_db = {0.0};
    spec.trials_per_point = 1;
    spec.methods = {Method::substitution, Method::sliding};
    int calls = 0;
    const auto rows = run_sweep(spec, [&](double snr, const std::vector<SweepRow>& point) {
        ++calls;
        CHECK(snr == 0.0);
        CHECK(point.size() == 4);
    });
    CHECK(calls == 1);
    CHECK(rows.size() == 4);
}

TEST_CASE("sweep CSV is identical across runs and worker counts")
{
    SweepSpec spec;
    spec.snr_grid_db = {-10.0, 0.0};
    spec.trials_per_point = 6;
    spec.methods = {Method::hybrid, Method::autocorr};
    spec.seed = 42;

    auto csv = [&](unsigned workers) {
        SweepSpec s = spec;
        s.workers = workers;
        std::ostringstream out;
        write_csv(out, run_sweep(s));
        return out.str();
    };
    const auto a = csv(1);
    CHECK(a == csv(1));
    CHECK(a == csv(3));
    spec.seed = 43;
    const auto other = csv(1);
    CHECK(other.substr(0, other.find('\n')) == a.substr(0, a.find('\n')));
}

TEST_CASE("trial seeds")
{
    CHECK(trial_seed(1, 0, 0) == trial_seed(1, 0, 0));
    CHECK(trial_seed(1, 0, 1) != trial_seed(1, 1, 0));
    CHECK(trial_seed(1, 0, 0) != trial_seed(2, 0, 0));
}

TEST_CASE("CSV formatting")
{
    SweepRow r;
    r.snr_db = -40.0;
    r.method = Method::substitution;
    r.parameter = Parameter::n_cn;
    r.accuracy = 1.0;
    r.amplitude_error = 0.0;
    r.trials = 200;
    r.failures = 0;
    std::ostringstream out;
    write_csv(out, {r});
    CHECK(out.str() == "snr_db,method,parameter,accuracy,amplitude_error,trials,failures\n"
                       "-40,substitution,n_cn,1,0,200,0\n");
    CHECK(format_real(0.003125) == "0.003125");
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_real(std::nan("")) == "nan");
    CHECK(format_real(-0.0) == "0");
}

TEST_CASE("sweep spec validation")
{
    SweepSpec spec;
    CHECK_THROWS_AS(spec.validate(), InvalidConfig);
    spec.snr_grid_db = {0.0};
    spec.methods = {Method::hybrid};
    CHECK_NOTHROW(spec.validate());
    spec.trials_per_point = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidConfig);
    spec.trials_per_point = 1;
    spec.exact_match_tolerance = -1;
    CHECK_THROWS_AS(spec.validate(), InvalidConfig);
}
