#include "ofdmest/synth.hpp"

#include "ofdmest/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ofdmest::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Gray code for one 4-level axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
double gray_level(unsigned bits)
{
    switch (bits & 3U) {
    case 0b00: return -3.0;
    case 0b01: return -1.0;
    case 0b11: return 1.0;
    default: return 3.0;
    }
}

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label)
{
    std::uint64_t s = parent;
    splitmix64(s);
    s ^= label * 0xd1b54a32d192ed03ULL;
    return splitmix64(s);
}

QamSymbolStream::QamSymbolStream(std::uint64_t seed) : state_(seed) {}

const std::vector<cdouble>& QamSymbolStream::constellation()
{
    static const std::vector<cdouble> points = [] {
        std::vector<cdouble> pts;
        const double scale = 1.0 / std::sqrt(10.0);
        for (unsigned idx = 0; idx < 16; ++idx) {
            pts.emplace_back(gray_level(idx >> 2) * scale, gray_level(idx) * scale);
        }
        return pts;
    }();
    return points;
}

cdouble QamSymbolStream::next()
{
    return constellation()[splitmix64(state_) >> 60];
}

std::vector<cdouble> QamSymbolStream::take(std::size_t n)
{
    std::vector<cdouble> out(n);
    for (auto& s : out) s = next();
    return out;
}

GeneratedSignal generate_ofdm(const OfdmConfig& cfg)
{
    const SymbolLengths truth = derive_lengths(cfg);
    const int q = cfg.oversampling_rate;
    const int n_cn = cfg.carrier_count;
    const int guard = truth.n_g / q;
    const double baseband_rate = cfg.sample_rate_hz / q;

    QamSymbolStream qam(derive_seed(cfg.seed, kDataStream));
    std::vector<cdouble> baseband;
    baseband.reserve(static_cast<std::size_t>(cfg.symbol_count) * (n_cn + guard));
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_cn));
    for (int s = 0; s < cfg.symbol_count; ++s) {
        auto body = spectral::idft(qam.take(static_cast<std::size_t>(n_cn)));
        for (auto& v : body) v *= norm;
        baseband.insert(baseband.end(), body.end() - guard, body.end());
        baseband.insert(baseband.end(), body.begin(), body.end());
    }

    IqBuffer clean_bb(std::move(baseband), baseband_rate);
    IqBuffer noisy_bb = cfg.noiseless() ? clean_bb
                                        : add_awgn(clean_bb, cfg.snr_db, derive_seed(cfg.seed, kNoiseStream));

    auto finish = [&](const IqBuffer& bb) {
        IqBuffer up = oversample(bb, q);
        return cfg.carrier_freq_hz > 0.0 ? carrier_shift(up, cfg.carrier_freq_hz) : up;
    };
    return GeneratedSignal{finish(noisy_bb), finish(clean_bb), truth};
}

IqBuffer add_awgn(const IqBuffer& signal, double snr_db, std::uint64_t seed)
{
    const double power = signal.mean_power();
    if (!(power > 0.0)) {
        throw DegenerateInput("add_awgn: signal has zero power, SNR is undefined");
    }
    const double variance = power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(variance / 2.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cdouble> out(signal.samples().begin(), signal.samples().end());
    for (auto& s : out) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cdouble{sigma * re, sigma * im};
    }
    return {std::move(out), signal.sample_rate_hz()};
}

IqBuffer oversample(const IqBuffer& signal, int q)
{
    if (q < 1) throw InvalidConfig("oversampling rate must be >= 1");
    if (q == 1) return signal;
    std::vector<cdouble> out;
    out.reserve(signal.size() * static_cast<std::size_t>(q));
    for (const auto& s : signal.samples()) out.insert(out.end(), static_cast<std::size_t>(q), s);
    return {std::move(out), signal.sample_rate_hz() * q};
}

IqBuffer decimate(const IqBuffer& signal, int q)
{
    if (q < 1) throw InvalidConfig("decimation factor must be >= 1");
    if (q == 1) return signal;
    if (signal.size() < static_cast<std::size_t>(q)) {
        throw BufferTooShort("decimate: buffer shorter than the decimation factor");
    }
    std::vector<cdouble> out;
    out.reserve(signal.size() / static_cast<std::size_t>(q));
    for (std::size_t i = 0; i + static_cast<std::size_t>(q) <= signal.size(); i += static_cast<std::size_t>(q)) {
        out.push_back(signal[i]);
    }
    return {std::move(out), signal.sample_rate_hz() / q};
}

IqBuffer carrier_shift(const IqBuffer& signal, double carrier_freq_hz)
{
    const double w = 2.0 * std::numbers::pi * carrier_freq_hz / signal.sample_rate_hz();
    std::vector<cdouble> out(signal.samples().begin(), signal.samples().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= std::polar(1.0, w * static_cast<double>(i));
    }
    return {std::move(out), signal.sample_rate_hz()};
}

}  // namespace ofdmest::synth
