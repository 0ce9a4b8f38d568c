// transforms.hpp - Discrete transform chain between the delay-Doppler grid,
// the time-frequency grid, and the sampled waveform.
//
// Conventions follow the defining sums exactly: the inverse SFFT carries the
// 1/(MN) factor and the forward SFFT is unnormalized, so sfft(isfft(x)) = x.
// The rectangular-pulse synthesis/analysis pair carries (1, 1/M) so that
// wigner_rect(heisenberg_rect(X)) = X. tf_channel_gains + oracle_apply give
// an independent end-to-end reference for the sparse matrix assembly: the
// channel acts multiplicatively on the time-frequency grid.

#pragma once

#include "ddsim/channel.hpp"
#include "ddsim/grid.hpp"

#include <span>

namespace ddsim {

// X[n,m] = 1/(MN) * sum_{k,l} x[k,l] exp(+j2pi(nk/N - ml/M))
TfGrid isfft(const DdGrid& x);

// x[k,l] = sum_{n,m} X[n,m] exp(-j2pi(nk/N - ml/M))
DdGrid sfft(const TfGrid& X);

// s[nM+q] = sum_m X[n,m] exp(+j2pi m q / M); symbol n occupies samples
// [nM, (n+1)M) under the rectangular transmit pulse.
TimeFrame heisenberg_rect(const TfGrid& X);

// Y[n,m] = 1/M * sum_q y[nM+q] exp(-j2pi m q / M)
TfGrid wigner_rect(const TimeFrame& y);

// H[n,m] = sum_i h_i exp(+j2pi beta_i n/N) exp(-j2pi alpha_i beta_i/(NM))
//                exp(-j2pi m alpha_i/M), the multiplicative gain each
// integer tap contributes on the time-frequency grid.
TfGrid tf_channel_gains(std::span<const PathTap> taps, const GridDims& dims);

// Noiseless end-to-end reference: sfft(tf_channel_gains .* isfft(x)).
// Must agree with multiplication by build_H_link's matrix.
DdGrid oracle_apply(const DdGrid& x, std::span<const PathTap> taps);

} // namespace ddsim
