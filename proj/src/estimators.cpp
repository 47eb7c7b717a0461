#include "ofdmest/estimators.hpp"

#include "ofdmest/spectral.hpp"
#include "ofdmest/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace ofdmest {

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

int round_half_up(double x)
{
    return static_cast<int>(std::floor(x + 0.5));
}

// Local maxima of `p`, a plateau counting once at its midpoint. Samples
// within `eps` of a run's first value belong to the run.
std::vector<int> local_maxima(const std::vector<double>& p, bool circular, double eps)
{
    const int n = static_cast<int>(p.size());
    std::vector<int> out;
    if (n == 0) return out;

    int rot = 0;
    if (circular) {
        rot = static_cast<int>(std::min_element(p.begin(), p.end()) - p.begin());
    }
    auto at = [&](int i) { return p[static_cast<std::size_t>((i + rot) % n)]; };

    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && std::abs(at(j + 1) - at(i)) <= eps) ++j;
        const double v = at(i);
        bool is_peak;
        if (circular) {
            if (i == 0 && j == n - 1) return out;
            is_peak = at((i - 1 + n) % n) < v && at((j + 1) % n) < v;
        } else {
            is_peak = i > 0 && j < n - 1 && at(i - 1) < v && at(j + 1) < v;
        }
        if (is_peak) out.push_back(((i + j) / 2 + rot) % n);
        i = j + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

void PeakDetectParams::validate() const
{
    if (!(min_prominence_ratio > 0.0 && min_prominence_ratio < 1.0)) {
        throw InvalidConfig("min_prominence_ratio must lie in (0,1)");
    }
    if (min_separation < 0) throw InvalidConfig("min_separation must be >= 0");
    if (min_floor_ratio < 0.0) throw InvalidConfig("min_floor_ratio must be >= 0");
}

PeakDetectParams PeakDetectParams::segment_spectrum()
{
    return {};
}

PeakDetectParams PeakDetectParams::lag_psd()
{
    PeakDetectParams p;
    p.min_prominence_ratio = 0.2;
    p.exclude_dc = false;
    p.circular = true;
    p.min_floor_ratio = 8.0;
    return p;
}

PeakDetectParams PeakDetectParams::sliding(int n_u)
{
    PeakDetectParams p;
    p.exclude_dc = false;
    p.min_separation = std::max(1, n_u);
    return p;
}

PeakSet detect_peaks(const CorrelationProfile& profile, const PeakDetectParams& params)
{
    params.validate();
    const auto& p = profile.values;
    const int n = static_cast<int>(p.size());
    if (n == 0) return {};

    const int first = params.exclude_dc ? 1 : 0;
    if (first >= n) return {};
    const double ref = *std::max_element(p.begin() + first, p.end());
    if (!(ref > 0.0)) return {};
    const double threshold = params.min_prominence_ratio * ref;
    const double floor = params.min_floor_ratio > 0.0 ? params.min_floor_ratio * median_of(p)
                                                      : -std::numeric_limits<double>::infinity();
    const double overall = *std::max_element(p.begin(), p.end());
    const double eps = 1e-12 * std::max(overall, ref);

    std::vector<int> candidates;
    for (int idx : local_maxima(p, params.circular, eps)) {
        if (params.exclude_dc && idx == 0) continue;
        const double v = p[static_cast<std::size_t>(idx)];
        if (v >= threshold && v >= floor) candidates.push_back(idx);
    }

    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)];
    });
    auto distance = [&](int a, int b) {
        const int d = std::abs(a - b);
        return params.circular ? std::min(d, n - d) : d;
    };
    std::vector<int> kept;
    for (int c : candidates) {
        const bool clear = std::all_of(kept.begin(), kept.end(),
                                       [&](int k) { return distance(c, k) >= params.min_separation; });
        if (clear) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());
    return PeakSet(std::move(kept));
}

ProgressionResult progression_stats(const PeakSet& peaks)
{
    const auto& k = peaks.abscissas();
    const int n_all = peaks.count();
    ProgressionResult best{0, n_all, 0};
    if (n_all < 2) return best;

    const int k_max = k.back();
    std::vector<char> member(static_cast<std::size_t>(k_max) + 2, 0);
    for (int x : k) member[static_cast<std::size_t>(x)] = 1;
    auto near_member = [&](long c) {
        for (long t = c - 1; t <= c + 1; ++t) {
            if (t >= 0 && t <= k_max && member[static_cast<std::size_t>(t)]) return true;
        }
        return false;
    };

    // Index bounds follow the 1-based loops k_i < N/2 and k_j < N/2 + 2.
    const double half = n_all / 2.0;
    for (int i = 0; i + 1 < half; ++i) {
        for (int j = i + 1; j + 1 < half + 2 && j < n_all; ++j) {
            const int spacing = k[static_cast<std::size_t>(j)] - k[static_cast<std::size_t>(i)];
            if (spacing <= 3) continue;
            int count = 2;
            long cur = k[static_cast<std::size_t>(j)];
            while (cur < k_max) {
                cur += spacing;
                if (near_member(cur)) {
                    ++count;
                    if (count > best.n_use) {
                        best.n_use = count;
                        best.spacing = spacing;
                    }
                }
            }
        }
    }
    return best;
}

int estimate_nu_autocorr(const IqBuffer& signal, int search_max, int window, int min_lag)
{
    const auto n = static_cast<long>(signal.size());
    if (min_lag < 0 || search_max < min_lag) {
        throw std::invalid_argument("autocorrelation search needs 0 <= min_lag <= search_max");
    }
    if (search_max >= n || window + static_cast<long>(search_max) >= n || search_max > window) {
        throw BufferTooShort("buffer too short for autocorrelation search (need search_max <= window "
                             "and window + search_max < L_M)");
    }
    const auto profile = spectral::autocorr_objective_profile(signal, search_max, window);
    int best = min_lag;
    for (int lag = min_lag; lag <= search_max; ++lag) {
        if (profile.values[static_cast<std::size_t>(lag)] > profile.values[static_cast<std::size_t>(best)]) {
            best = lag;
        }
    }
    return best;
}

namespace {

struct LineFit {
    double slope{0.0};
    double intercept{0.0};
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - x_mean) * (x[i] - x_mean);
        sxy += (x[i] - x_mean) * (y[i] - y_mean);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, y_mean - slope * x_mean};
}

// Peaks within `tolerance` of the lattice intercept + period * i.
void lattice_members(const std::vector<int>& k, double period, double intercept, double tolerance,
                     std::vector<double>& xs, std::vector<double>& ys)
{
    xs.clear();
    ys.clear();
    for (int pos : k) {
        const double index = std::round((pos - intercept) / period);
        if (std::abs(pos - intercept - index * period) <= tolerance) {
            xs.push_back(index);
            ys.push_back(pos);
        }
    }
}

}  // namespace

int symbol_length_from_peaks(const PeakSet& peaks, int quantum)
{
    if (quantum < 1) throw std::invalid_argument("symbol length quantum must be >= 1");
    const auto& k = peaks.abscissas();
    if (k.size() < 2) throw EstimationFailed("fewer than two peaks in the sliding CP profile");

    std::vector<double> gaps;
    for (std::size_t i = 1; i < k.size(); ++i) gaps.push_back(k[i] - k[i - 1]);
    const double coarse = median_of(gaps);
    const double tolerance = coarse / 16.0;

    // Loose lattice from the anchor that collects the most peaks, so a small
    // error in the median gap does not push far peaks off the lattice.
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ax;
    std::vector<double> ay;
    for (int anchor : k) {
        lattice_members(k, coarse, anchor, coarse / 4.0, ax, ay);
        if (ax.size() > xs.size()) {
            xs = ax;
            ys = ay;
        }
    }

    LineFit line{coarse, ys.front() - coarse * xs.front()};
    for (int iter = 0; iter < 8 && xs.size() >= 2; ++iter) {
        line = least_squares(xs, ys);
        if (!(line.slope > 0.0)) break;
        const auto before = xs;
        lattice_members(k, line.slope, line.intercept, tolerance, xs, ys);
        if (xs == before) break;
    }
    if (xs.size() < 2 || 3 * xs.size() < 2 * k.size() || !(line.slope > 0.0)) {
        throw EstimationFailed("sliding CP profile peaks do not form a periodic train");
    }
    line = least_squares(xs, ys);

    // Trim points far off the fit (edge windows can line up by chance) and refit.
    if (xs.size() >= 3) {
        std::vector<double> residuals;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            residuals.push_back(std::abs(ys[i] - (line.intercept + line.slope * xs[i])));
        }
        const double limit = std::max(1.0, 3.0 * median_of(residuals));
        std::vector<double> kept_x;
        std::vector<double> kept_y;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (residuals[i] <= limit) {
                kept_x.push_back(xs[i]);
                kept_y.push_back(ys[i]);
            }
        }
        if (kept_x.size() >= 2 && kept_x.size() < xs.size()) line = least_squares(kept_x, kept_y);
    }
    return quantum * std::max(1, round_half_up(line.slope / quantum));
}

int estimate_ns_sliding(const IqBuffer& signal, int n_u, int window, int quantum)
{
    const auto profile = spectral::sliding_cp_profile(signal, n_u, window);
    return symbol_length_from_peaks(detect_peaks(profile, PeakDetectParams::sliding(n_u)), quantum);
}

int mean_of_candidates(const std::vector<int>& candidates)
{
    if (candidates.empty()) throw EstimationFailed("no candidate symbol length qualified");
    const double sum = std::accumulate(candidates.begin(), candidates.end(), 0.0);
    return round_half_up(sum / static_cast<double>(candidates.size()));
}

namespace {

// Length of the run of consecutive integers at the end of `v`.
std::size_t contiguous_tail(const std::vector<int>& v)
{
    if (v.empty()) return 0;
    std::size_t len = 1;
    while (len < v.size() && v[v.size() - len] - v[v.size() - len - 1] == 1) ++len;
    return len;
}

}  // namespace

TraversalResult estimate_ns_traversal(const IqBuffer& signal, const TraversalParams& params,
                                      const PeakDetectParams& detect)
{
    params.validate();
    detect.validate();
    if (spectral::max_segment_count(signal.size(), params.n_max - 1, params.n_o, params.segment_lag) < 1) {
        throw BufferTooShort("buffer too short for traversal up to n_max");
    }

    TraversalResult result;
    std::vector<int> retained;
    for (int n_p = params.n_min; n_p < params.n_max; ++n_p) {
        const int n_ch = spectral::max_segment_count(signal.size(), n_p, params.n_o, params.segment_lag);
        const auto avg = spectral::segment_average(signal, n_p, params.n_o, n_ch, params.segment_lag);
        const auto peaks = detect_peaks(spectral::spectrum_magnitude(avg), detect);
        const auto stats = progression_stats(peaks);

        const bool enough_peaks = params.literal_peak_predicate ? stats.n_all > params.n_min
                                                                : stats.n_all >= params.min_peak_count;
        const bool qualified = stats.n_all > 0 &&
                               static_cast<double>(stats.n_use) / stats.n_all > params.majority_threshold &&
                               enough_peaks && stats.spacing == params.n_o;
        result.evaluated.push_back({n_p, stats, qualified});

        if (qualified) {
            retained.push_back(n_p);
        } else if (contiguous_tail(retained) >= 2) {
            break;
        }
    }
    retained.erase(retained.begin(), retained.end() - static_cast<std::ptrdiff_t>(contiguous_tail(retained)));
    result.retained = retained;
    result.n_s = mean_of_candidates(retained);
    return result;
}

int estimate_oversampling(const IqBuffer& signal, const PeakDetectParams& detect)
{
    const auto n = static_cast<int>(signal.size());
    if (n < 64) throw BufferTooShort("oversampling estimate needs at least 64 samples");
    const auto peaks = detect_peaks(spectral::lag_psd(signal, 1), detect);
    const auto& k = peaks.abscissas();
    if (k.empty()) return 1;

    std::vector<double> gaps;
    for (std::size_t i = 1; i < k.size(); ++i) gaps.push_back(k[i] - k[i - 1]);
    gaps.push_back(k.front() + n - k.back());
    const double spacing = median_of(gaps);
    return std::max(1, round_half_up(n / spacing));
}

int carriers_from_symbol_length(int n_os)
{
    if (n_os < 1) throw std::invalid_argument("baseband symbol length must be positive");
    return static_cast<int>(std::bit_floor(static_cast<unsigned>(n_os)));
}

// ---------------------------------------------------------------------------
// BlindAnalyzer

BlindAnalyzer::BlindAnalyzer(IqBuffer signal, EstimatorSettings settings)
    : signal_(std::move(signal)), settings_(std::move(settings))
{
}

namespace {

template <class T, class F>
std::variant<T, std::string> capture(F&& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        return std::string(e.what());
    }
}

template <class T>
const std::string* failure_of(const std::variant<T, std::string>& v)
{
    return std::get_if<std::string>(&v);
}

void note_failure(EstimationReport& r, const std::string& why)
{
    if (!r.failure) r.failure = why;
}

}  // namespace

const std::variant<int, std::string>& BlindAnalyzer::oversampling()
{
    if (!q_) q_ = capture<int>([&] { return estimate_oversampling(signal_, settings_.psd_peaks); });
    return *q_;
}

const std::variant<TraversalResult, std::string>& BlindAnalyzer::traversal()
{
    if (!traversal_) {
        const auto& q = oversampling();
        if (const auto* why = failure_of(q)) {
            traversal_ = *why;
        } else {
            traversal_ = capture<TraversalResult>([&] {
                const auto baseband = synth::decimate(signal_, std::get<int>(q));
                return estimate_ns_traversal(baseband, settings_.traversal, settings_.segment_peaks);
            });
        }
    }
    return *traversal_;
}

const std::variant<int, std::string>& BlindAnalyzer::useful_length()
{
    if (!n_u_) {
        const auto& q = oversampling();
        const int min_lag = failure_of(q) ? 1 : std::get<int>(q);
        const int n = static_cast<int>(signal_.size());
        const int window = settings_.autocorr_window.value_or(n / 2);
        const int search_max = settings_.autocorr_search_max.value_or(n / 2 - 1);
        n_u_ = capture<int>([&] { return estimate_nu_autocorr(signal_, search_max, window, min_lag); });
    }
    return *n_u_;
}

const std::variant<int, std::string>& BlindAnalyzer::symbol_length_sliding()
{
    if (!n_s_sliding_) {
        const auto& n_u = useful_length();
        if (const auto* why = failure_of(n_u)) {
            n_s_sliding_ = *why;
        } else {
            const int nu = std::get<int>(n_u);
            const int window = settings_.sliding_window.value_or(std::max(1, nu / 4));
            const auto& q = oversampling();
            const int quantum = failure_of(q) ? 1 : std::get<int>(q);
            n_s_sliding_ = capture<int>([&] { return estimate_ns_sliding(signal_, nu, window, quantum); });
        }
    }
    return *n_s_sliding_;
}

EstimationReport BlindAnalyzer::autocorr_report()
{
    EstimationReport r;
    r.method_used = Method::autocorr;
    if (const auto* why = failure_of(useful_length())) {
        note_failure(r, *why);
    } else {
        r.n_u_hat = std::get<int>(useful_length());
    }
    return r;
}

EstimationReport BlindAnalyzer::sliding_report()
{
    EstimationReport r;
    r.method_used = Method::sliding;
    if (const auto* why = failure_of(symbol_length_sliding())) {
        note_failure(r, *why);
    } else {
        r.n_s_hat = std::get<int>(symbol_length_sliding());
    }
    return r;
}

EstimationReport BlindAnalyzer::traversal_report()
{
    EstimationReport r;
    r.method_used = Method::traversal;
    const auto& q = oversampling();
    const auto& t = traversal();
    if (const auto* why = failure_of(q)) {
        note_failure(r, *why);
    } else if (const auto* why2 = failure_of(t)) {
        note_failure(r, *why2);
    } else {
        const auto& tr = std::get<TraversalResult>(t);
        r.n_os_hat = tr.n_s;
        r.n_s_hat = std::get<int>(q) * tr.n_s;
        r.traversal_candidates = tr.retained;
    }
    return r;
}

EstimationReport BlindAnalyzer::substitution_report()
{
    EstimationReport r;
    r.method_used = Method::substitution;
    const auto& q = oversampling();
    if (const auto* why = failure_of(q)) {
        note_failure(r, *why);
        return r;
    }
    r.q_hat = std::get<int>(q);
    const auto& t = traversal();
    if (const auto* why = failure_of(t)) {
        note_failure(r, *why);
        return r;
    }
    const auto& tr = std::get<TraversalResult>(t);
    r.n_os_hat = tr.n_s;
    r.traversal_candidates = tr.retained;
    r.n_cn_hat = carriers_from_symbol_length(tr.n_s);
    r.n_u_hat = *r.q_hat * *r.n_cn_hat;
    return r;
}

EstimationReport BlindAnalyzer::hybrid_report(double snr_hint_db)
{
    if (std::isnan(snr_hint_db)) throw std::invalid_argument("SNR hint must not be NaN");
    EstimationReport r;
    if (snr_hint_db < settings_.hybrid_switch_db) {
        r = substitution_report();
        if (r.q_hat && r.n_os_hat) r.n_s_hat = *r.q_hat * *r.n_os_hat;
        r.method_used = Method::hybrid;
        return r;
    }

    r.method_used = Method::hybrid;
    const auto& q = oversampling();
    if (const auto* why = failure_of(q)) {
        note_failure(r, *why);
    } else {
        r.q_hat = std::get<int>(q);
    }
    const auto& n_u = useful_length();
    if (const auto* why = failure_of(n_u)) {
        note_failure(r, *why);
    } else {
        r.n_u_hat = std::get<int>(n_u);
        if (r.q_hat && *r.n_u_hat >= *r.q_hat) {
            r.n_cn_hat = carriers_from_symbol_length(*r.n_u_hat / *r.q_hat);
        }
    }
    const auto& n_s = symbol_length_sliding();
    if (const auto* why = failure_of(n_s)) {
        note_failure(r, *why);
    } else {
        r.n_s_hat = std::get<int>(n_s);
        if (r.q_hat) r.n_os_hat = std::max(1, round_half_up(static_cast<double>(*r.n_s_hat) / *r.q_hat));
    }
    return r;
}

EstimationReport BlindAnalyzer::run(Method method, double snr_hint_db)
{
    switch (method) {
    case Method::autocorr: return autocorr_report();
    case Method::sliding: return sliding_report();
    case Method::traversal: return traversal_report();
    case Method::substitution: return substitution_report();
    case Method::hybrid: return hybrid_report(snr_hint_db);
    }
    throw std::invalid_argument("unknown method");
}

EstimationReport estimate_carriers_substitution(const IqBuffer& signal, const EstimatorSettings& settings)
{
    BlindAnalyzer analyzer(signal, settings);
    auto report = analyzer.run(Method::substitution);
    if (report.failed()) throw EstimationFailed(*report.failure);
    return report;
}

EstimationReport estimate_hybrid(const IqBuffer& signal, double snr_hint_db, const EstimatorSettings& settings)
{
    if (std::isnan(snr_hint_db)) throw std::invalid_argument("SNR hint must not be NaN");
    BlindAnalyzer analyzer(signal, settings);
    auto report = analyzer.run(Method::hybrid, snr_hint_db);
    if (report.failed()) throw EstimationFailed(*report.failure);
    return report;
}

}  // namespace ofdmest
