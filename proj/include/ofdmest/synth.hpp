#pragma once

#include "ofdmest/core.hpp"

#include <cstdint>
#include <vector>

namespace ofdmest::synth {

/// Gray-mapped square 16-QAM, scaled to unit average power over the constellation.
class QamSymbolStream {
public:
    explicit QamSymbolStream(std::uint64_t seed);

    cdouble next();
    std::vector<cdouble> take(std::size_t n);

    /// The 16 constellation points in index order (bits b3 b2 b1 b0).
    static const std::vector<cdouble>& constellation();

private:
    std::uint64_t state_;
};

struct GeneratedSignal {
    IqBuffer signal;
    /// The same capture with no noise added.
    IqBuffer clean;
    SymbolLengths truth;
};

/// Synthesizes symbol_count OFDM symbols over an AWGN channel.
///
/// Each symbol is the unit-power inverse DFT of carrier_count QAM symbols,
/// prefixed with its last N_g baseband samples. Noise is added to the
/// baseband stream, which is then oversampled by q (sample repetition) and,
/// when carrier_freq_hz > 0, shifted by a complex exponential.
GeneratedSignal generate_ofdm(const OfdmConfig& cfg);

/// Adds circularly-symmetric complex Gaussian noise with per-sample variance
/// mean_power / 10^(snr_db/10). Throws DegenerateInput on an all-zero signal.
IqBuffer add_awgn(const IqBuffer& signal, double snr_db, std::uint64_t seed);

/// Repeats every sample q times; the sample rate scales by q.
IqBuffer oversample(const IqBuffer& signal, int q);

/// Keeps every q-th sample starting at index 0.
IqBuffer decimate(const IqBuffer& signal, int q);

/// Multiplies sample i by exp(j 2 pi f i / fs).
IqBuffer carrier_shift(const IqBuffer& signal, double carrier_freq_hz);

/// Independent 64-bit seed derived from a parent seed and a stream label.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label);

}  // namespace ofdmest::synth
