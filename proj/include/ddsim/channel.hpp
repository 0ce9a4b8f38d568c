// channel.hpp - Sparse delay-Doppler channels and equivalent-matrix assembly.
//
// A propagation path is an integer (delay tap, Doppler tap) pair with a
// complex gain. A link (one tx/rx antenna pair) is a fixed set of P such
// paths; a MIMO channel is an n_a x n_a array of links sharing one tap
// support. build_H_link realizes the circular 2D convolution as a sparse
// matrix acting on vectorized frames; build_H_mimo tiles links into the
// block system matrix.

#pragma once

#include "ddsim/grid.hpp"
#include "ddsim/rng.hpp"
#include "ddsim/sparse.hpp"
#include "ddsim/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace ddsim {

struct PathTap {
    int delay_tap;     // alpha in [0, M)
    int doppler_tap;   // beta in [0, N)
    cplx gain;
};

// Exactly the taps of one tx/rx antenna pair; (alpha, beta) pairs distinct.
struct LinkChannel {
    std::vector<PathTap> taps;
};

struct MimoChannel {
    int antennas = 1;
    std::vector<LinkChannel> links;   // [rx * antennas + tx]

    const LinkChannel& link(int rx, int tx) const {
        return links[static_cast<size_t>(rx) * static_cast<size_t>(antennas) +
                     static_cast<size_t>(tx)];
    }
};

// Physical path description: delay in seconds, Doppler in Hz, and an
// optional fixed gain used by regression fixtures instead of random fading.
struct ProfilePath {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    std::optional<cplx> fixed_gain;
};

struct ChannelProfile {
    std::vector<ProfilePath> paths;

    // Bundled 5-path evaluation profile: delays 2.08..10.41 us on a 480 kHz
    // delay grid, Dopplers 0..1880 Hz (about 500 km/h at a 4 GHz carrier).
    static ChannelProfile default_profile();

    // Text table, one path per line: delay_us doppler_hz [gain_re gain_im]
    static ChannelProfile load(const std::filesystem::path& file);
};

// Integer tap support resolved against a grid.
struct TapSupport {
    int delay_tap;
    int doppler_tap;
    std::optional<cplx> fixed_gain;
};

// Snaps physical delays/Dopplers to grid taps. A path whose rounding error
// exceeds 0.1 of a tap is rejected: fractional taps are out of scope.
std::vector<TapSupport> taps_from_profile(const ChannelProfile& profile, const GridDims& dims);

// h' = h * exp(-j 2 pi alpha beta / (N M)); the phase the 2D circular
// convolution attaches to each tap.
cplx effective_gain(const PathTap& tap, const GridDims& dims);

// Per-link gains i.i.d. CN(0, 1/P) (unit mean total power per link) unless
// the support entry carries a fixed gain, which is then used for all links.
MimoChannel gen_random_mimo_channel(Rng& rng, std::span<const TapSupport> support, int antennas);

// Row k+N*l couples to column ((k - beta) mod N) + N*((l - alpha) mod M)
// with value effective_gain(tap); exactly P nonzeros per row and column.
SparseChannelMatrix build_H_link(const LinkChannel& link, const GridDims& dims);

// Block matrix of per-link matrices, order antennas*N*M.
SparseChannelMatrix build_H_mimo(const MimoChannel& channel, const GridDims& dims);

// y = H x + v with v i.i.d. complex Gaussian, E|v_i|^2 = noise_std^2.
std::vector<cplx> apply_channel(const SparseChannelMatrix& H, std::span<const cplx> x,
                                double noise_std, Rng& rng);

} // namespace ddsim
