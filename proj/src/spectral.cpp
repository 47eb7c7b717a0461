#include "ofdmest/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>
#include <utility>

namespace ofdmest::spectral {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (length, direction) and kept for the
// life of the process.
class PlanCache {
public:
    fftw_plan get(int n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
        auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

std::vector<cdouble> transform(std::span<const cdouble> x, int sign)
{
    const int n = static_cast<int>(x.size());
    std::vector<cdouble> in(x.begin(), x.end());
    std::vector<cdouble> out(x.size());
    if (n == 0) throw std::invalid_argument("transform of an empty sequence");
    fftw_plan p = plan_cache().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<cdouble> dft(std::span<const cdouble> x)
{
    return transform(x, FFTW_FORWARD);
}

std::vector<cdouble> idft(std::span<const cdouble> x)
{
    return transform(x, FFTW_BACKWARD);
}

double normalized_autocorr_objective(const IqBuffer& signal, int k, int window)
{
    const auto n_total = static_cast<long>(signal.size());
    if (window < 0 || window >= n_total) {
        throw BufferTooShort("autocorrelation window must lie in [0, L_M)");
    }
    if (k < 0 || k > window) {
        throw std::out_of_range("lag " + std::to_string(k) + " outside [0, window]");
    }
    const auto r = signal.samples();
    const long n = n_total - window;
    cdouble num{0.0, 0.0};
    double den = 0.0;
    for (long i = 0; i < n; ++i) {
        num += r[i] * std::conj(r[i + k]);
        den += std::norm(r[i]) + std::norm(r[i + k]);
    }
    den *= 0.5;
    return den > 0.0 ? std::abs(num) / den : 0.0;
}

CorrelationProfile autocorr_objective_profile(const IqBuffer& signal, int max_lag, int window)
{
    const auto n_total = static_cast<long>(signal.size());
    if (window < 0 || window >= n_total) {
        throw BufferTooShort("autocorrelation window must lie in [0, L_M)");
    }
    if (max_lag < 0 || max_lag > window) {
        throw std::out_of_range("max lag must lie in [0, window]");
    }
    const auto r = signal.samples();
    const long n = n_total - window;

    // prefix[i] = sum_{m < i} |r(m)|^2
    std::vector<double> prefix(static_cast<std::size_t>(n_total) + 1, 0.0);
    for (long i = 0; i < n_total; ++i) prefix[i + 1] = prefix[i] + std::norm(r[i]);
    const double head_energy = prefix[n];

    std::vector<double> values(static_cast<std::size_t>(max_lag) + 1);
    for (int k = 0; k <= max_lag; ++k) {
        cdouble num{0.0, 0.0};
        for (long i = 0; i < n; ++i) num += r[i] * std::conj(r[i + k]);
        const double den = 0.5 * (head_energy + prefix[n + k] - prefix[k]);
        values[k] = den > 0.0 ? std::abs(num) / den : 0.0;
    }
    return {std::move(values), AbscissaKind::lag};
}

CorrelationProfile sliding_cp_profile(const IqBuffer& signal, int n_u, int window)
{
    const auto n_total = static_cast<long>(signal.size());
    if (n_u < 1 || window < 1) {
        throw std::invalid_argument("sliding profile needs n_u >= 1 and window >= 1");
    }
    const long count = n_total - n_u - window;
    if (count < 1) {
        throw BufferTooShort("buffer too short for sliding CP profile");
    }
    const auto r = signal.samples();
    const long pairs = n_total - n_u;

    std::vector<cdouble> prod_prefix(static_cast<std::size_t>(pairs) + 1);
    std::vector<double> energy_prefix(static_cast<std::size_t>(pairs) + 1, 0.0);
    for (long i = 0; i < pairs; ++i) {
        prod_prefix[i + 1] = prod_prefix[i] + r[i] * std::conj(r[i + n_u]);
        energy_prefix[i + 1] = energy_prefix[i] + std::norm(r[i]) + std::norm(r[i + n_u]);
    }

    std::vector<double> values(static_cast<std::size_t>(count));
    for (long j = 0; j < count; ++j) {
        const long lo = j + 1;
        const long hi = lo + window;
        const cdouble num = prod_prefix[hi] - prod_prefix[lo];
        const double den = 0.5 * (energy_prefix[hi] - energy_prefix[lo]);
        values[j] = den > 0.0 ? std::min(1.0, std::abs(num) / den) : 0.0;
    }
    return {std::move(values), AbscissaKind::position};
}

int max_segment_count(std::size_t signal_length, int n_p, int n_o, int lag)
{
    if (n_p < 1 || n_o < 1 || lag < 0) return 0;
    // last segment reads samples up to (n_ch - 1) n_p + n_o n_p + lag - 1
    const long avail = static_cast<long>(signal_length) - static_cast<long>(n_o) * n_p - lag;
    return avail < 0 ? 0 : static_cast<int>(avail / n_p) + 1;
}

SegmentAverage segment_average(const IqBuffer& signal, int n_p, int n_o, int n_ch, int lag)
{
    if (n_p < 1 || n_o < 1 || n_ch < 1 || lag < 0) {
        throw std::invalid_argument("segment_average needs n_p, n_o, n_ch >= 1 and lag >= 0");
    }
    if (n_ch > max_segment_count(signal.size(), n_p, n_o, lag)) {
        throw BufferTooShort("insufficient samples for " + std::to_string(n_ch) +
                             " segments of length " + std::to_string(n_o * n_p));
    }
    const auto r = signal.samples();
    const std::size_t len = static_cast<std::size_t>(n_o) * static_cast<std::size_t>(n_p);
    SegmentAverage avg;
    avg.values.assign(len, cdouble{0.0, 0.0});
    avg.n_p = n_p;
    avg.n_o = n_o;
    avg.n_ch = n_ch;
    avg.lag = lag;
    for (int m = 0; m < n_ch; ++m) {
        const std::size_t base = static_cast<std::size_t>(m) * static_cast<std::size_t>(n_p);
        for (std::size_t i = 0; i < len; ++i) {
            avg.values[i] += r[base + i] * std::conj(r[base + i + static_cast<std::size_t>(lag)]);
        }
    }
    const double scale = 1.0 / n_ch;
    for (auto& v : avg.values) v *= scale;
    return avg;
}

CorrelationProfile spectrum_magnitude(const SegmentAverage& avg)
{
    if (avg.values.empty()) throw std::invalid_argument("empty segment average");
    const auto spectrum = dft(avg.values);
    std::vector<double> mag(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) mag[i] = std::abs(spectrum[i]);
    return {std::move(mag), AbscissaKind::frequency_bin};
}

CorrelationProfile lag_psd(const IqBuffer& signal, int tau)
{
    const auto n = static_cast<long>(signal.size());
    if (tau < 0) throw std::invalid_argument("lag_psd needs tau >= 0");
    if (n < tau + 2) throw BufferTooShort("lag_psd needs at least tau + 2 samples");
    const auto r = signal.samples();
    std::vector<cdouble> prod(static_cast<std::size_t>(n), cdouble{0.0, 0.0});
    for (long i = 0; i + tau < n; ++i) prod[i] = r[i] * std::conj(r[i + tau]);
    const auto spectrum = dft(prod);
    std::vector<double> mag(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) mag[i] = std::abs(spectrum[i]);
    return {std::move(mag), AbscissaKind::frequency_bin};
}

}  // namespace ofdmest::spectral
