#pragma once

#include "ofdmest/core.hpp"

#include <span>
#include <vector>

namespace ofdmest::spectral {

/// Unnormalized forward DFT, any length: X[n] = sum_i x[i] e^{-j 2 pi n i / N}.
std::vector<cdouble> dft(std::span<const cdouble> x);

/// Unnormalized inverse DFT: x[i] = sum_n X[n] e^{+j 2 pi n i / N}.
std::vector<cdouble> idft(std::span<const cdouble> x);

/// Normalized lag correlation at a single lag.
///
/// Sums over the first L_M - window samples:
///   |sum r(i) r*(i+k)| / (0.5 * sum (|r(i)|^2 + |r(i+k)|^2)),
/// which lies in [0,1]. Requires 0 <= k <= window < L_M.
double normalized_autocorr_objective(const IqBuffer& signal, int k, int window);

/// The same objective evaluated for every lag in [0, max_lag].
CorrelationProfile autocorr_objective_profile(const IqBuffer& signal, int max_lag, int window);

/// Windowed normalized correlation at fixed lag n_u, slid across the buffer.
///
/// Entry j uses the window of `window` samples starting at sample j + 1, so
/// there are L_M - n_u - window entries. Values lie in [0,1].
CorrelationProfile sliding_cp_profile(const IqBuffer& signal, int n_u, int window);

struct SegmentAverage {
    std::vector<cdouble> values;
    int n_p{0};
    int n_o{0};
    int n_ch{0};
    int lag{0};
};

/// Averages n_ch segments of length n_o*n_p, each shifted by n_p, of the
/// lag product r(i) r*(i+lag).
SegmentAverage segment_average(const IqBuffer& signal, int n_p, int n_o, int n_ch, int lag = 0);

/// Largest segment count segment_average accepts for this buffer.
int max_segment_count(std::size_t signal_length, int n_p, int n_o, int lag = 0);

/// |DFT| of the segment average over its full length.
CorrelationProfile spectrum_magnitude(const SegmentAverage& avg);

/// |DFT| over L_M bins of the lag-tau product r(i) r*(i+tau).
CorrelationProfile lag_psd(const IqBuffer& signal, int tau = 1);

}  // namespace ofdmest::spectral
