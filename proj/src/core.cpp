#include "ofdmest/core.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace ofdmest {

void OfdmConfig::validate() const
{
    if (carrier_count < 2) {
        throw InvalidConfig("carrier_count must be >= 2");
    }
    if (!(cp_ratio > 0.0 && cp_ratio < 1.0)) {
        throw InvalidConfig("cp_ratio must lie in (0,1)");
    }
    const double guard = cp_ratio * carrier_count;
    if (std::abs(guard - std::round(guard)) > 1e-9) {
        throw InvalidConfig("cp_ratio * carrier_count must be an integer");
    }
    if (oversampling_rate < 1) {
        throw InvalidConfig("oversampling_rate must be >= 1");
    }
    if (symbol_count < 1) {
        throw InvalidConfig("symbol_count must be >= 1");
    }
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw InvalidConfig("sample_rate_hz must be positive");
    }
    if (!(carrier_freq_hz >= 0.0) || carrier_freq_hz >= sample_rate_hz / 2.0) {
        throw InvalidConfig("carrier_freq_hz must lie in [0, sample_rate_hz/2)");
    }
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
        throw InvalidConfig("snr_db must be finite or +inf");
    }
}

SymbolLengths derive_lengths(const OfdmConfig& cfg)
{
    cfg.validate();
    const int guard = static_cast<int>(std::lround(cfg.cp_ratio * cfg.carrier_count));
    SymbolLengths out;
    out.n_u = cfg.oversampling_rate * cfg.carrier_count;
    out.n_g = cfg.oversampling_rate * guard;
    out.n_s = out.n_u + out.n_g;
    return out;
}

IqBuffer::IqBuffer(std::vector<cdouble> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz)
{
    if (samples_.empty()) {
        throw std::invalid_argument("IqBuffer requires at least one sample");
    }
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
        throw std::invalid_argument("IqBuffer sample rate must be positive");
    }
    for (const auto& s : samples_) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw std::invalid_argument("IqBuffer samples must be finite");
        }
    }
}

double IqBuffer::mean_power() const
{
    double acc = 0.0;
    for (const auto& s : samples_) acc += std::norm(s);
    return acc / static_cast<double>(samples_.size());
}

IqBuffer IqBuffer::head(std::size_t n) const
{
    n = std::min(n, samples_.size());
    return IqBuffer({samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(n)},
                    sample_rate_hz_);
}

CorrelationProfile::CorrelationProfile(std::vector<double> v, AbscissaKind kind)
    : values(std::move(v)), abscissa_kind(kind)
{
    if (values.empty()) {
        throw std::invalid_argument("CorrelationProfile must not be empty");
    }
    for (double x : values) {
        if (!std::isfinite(x)) throw std::invalid_argument("CorrelationProfile values must be finite");
    }
}

PeakSet::PeakSet(std::vector<int> abscissas) : abscissas_(std::move(abscissas))
{
    for (std::size_t i = 0; i < abscissas_.size(); ++i) {
        if (abscissas_[i] < 0) throw std::invalid_argument("peak abscissa must be nonnegative");
        if (i > 0 && abscissas_[i] <= abscissas_[i - 1]) {
            throw std::invalid_argument("peak abscissas must be strictly increasing");
        }
    }
}

namespace {
constexpr std::array<std::pair<Method, std::string_view>, 5> kMethodNames{{
    {Method::autocorr, "autocorr"},
    {Method::sliding, "sliding"},
    {Method::traversal, "traversal"},
    {Method::substitution, "substitution"},
    {Method::hybrid, "hybrid"},
}};
}  // namespace

std::string_view to_string(Method m)
{
    for (const auto& [method, name] : kMethodNames) {
        if (method == m) return name;
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
    for (const auto& [method, n] : kMethodNames) {
        if (n == name) return method;
    }
    return std::nullopt;
}

void TraversalParams::validate() const
{
    if (n_min < 1 || n_max <= n_min) {
        throw InvalidConfig("traversal requires 1 <= n_min < n_max");
    }
    if (n_o < 2) throw InvalidConfig("traversal requires n_o >= 2");
    if (!(majority_threshold > 0.0 && majority_threshold <= 1.0)) {
        throw InvalidConfig("majority_threshold must lie in (0,1]");
    }
    if (segment_lag < 0) throw InvalidConfig("segment_lag must be >= 0");
}

bool is_power_of_two(long long v)
{
    return v > 0 && (v & (v - 1)) == 0;
}

}  // namespace ofdmest
