// ofdm.hpp - Multicarrier (CP-OFDM) baseline over the same physical channel.
//
// A frame is N consecutive OFDM blocks of M subcarriers. The channel acts in
// the time-delay domain on the CP-extended sample stream; the end-to-end
// frequency-domain matrix is
//     H_ofdm = D * B_cpre * H_td * B_cpin * D^H
// (block DFT, CP removal, banded time-delay channel, CP insertion, block
// IDFT). With the CP covering the delay spread each block is isolated, but
// Doppler breaks subcarrier orthogonality inside a block, so H_ofdm carries
// intercarrier interference. Sparsifying it row by row lets the same
// message-passing detector run on the OFDM model.

#pragma once

#include "ddsim/channel.hpp"
#include "ddsim/grid.hpp"
#include "ddsim/sparse.hpp"

#include <span>
#include <vector>

namespace ddsim {

struct OfdmDims {
    GridDims grid;          // M subcarriers per block, N blocks per frame
    int cyclic_prefix;      // CP, must cover the maximum delay tap

    OfdmDims(const GridDims& g, int cp) : grid(g), cyclic_prefix(cp) {
        if (cp < 0) throw std::invalid_argument("cyclic prefix must be >= 0");
        if (cp >= g.delay_bins)
            throw std::invalid_argument("cyclic prefix must be < block size");
    }

    int block_len() const { return grid.delay_bins + cyclic_prefix; }       // L
    int frame_samples() const { return grid.doppler_bins * block_len(); }   // N*L

    // CP sized to the delay spread of the given taps.
    static OfdmDims for_taps(const GridDims& grid, std::span<const PathTap> taps);
};

// Lower-banded N*L x N*L matrix: entry (r, r - alpha) = h * phase(r) per tap,
// stored as one diagonal band per delay offset.
class TimeDelayMatrix {
public:
    struct Band {
        int delay;                   // alpha: offset below the main diagonal
        std::vector<cplx> values;    // values[r] multiplies sample r - alpha; first alpha entries 0
    };

    TimeDelayMatrix(int order, std::vector<Band> bands);

    int order() const { return order_; }
    std::span<const Band> bands() const { return bands_; }
    cplx entry(int row, int col) const;                      // 0 off the bands
    std::vector<cplx> apply(std::span<const cplx> x) const;

private:
    int order_;
    std::vector<Band> bands_;
};

// Time-delay channel for one frame: H_td[r, r - alpha_i] =
// h_i exp(+j2pi beta_i r / (N M)). Entries reaching before the frame start
// are zero (they only feed discarded CP samples).
TimeDelayMatrix build_Htd(std::span<const PathTap> taps, const OfdmDims& dims);

// Dense N*M x N*M end-to-end matrix, assembled block by block.
std::vector<cplx> build_H_ofdm(const TimeDelayMatrix& H_td, const OfdmDims& dims);

// Literal five-factor product D * B_cpre * H_td * B_cpin * D^H via explicit
// dense matrices. Independent construction used to cross-check build_H_ofdm;
// only sensible at small sizes.
std::vector<cplx> build_H_ofdm_reference(const TimeDelayMatrix& H_td, const OfdmDims& dims);

// Unitary M-point DFT, row-major, W[m][q] = exp(-j2pi m q / M)/sqrt(M).
std::vector<cplx> unitary_dft_matrix(int m);

// Dense block matrix of per-link OFDM matrices, order antennas*N*M.
std::vector<cplx> build_H_mimo_ofdm(const MimoChannel& channel, const OfdmDims& dims);

// Keeps each row's largest-magnitude entries until the kept energy reaches
// energy_keep of the row total; drives the factor graph for MP detection.
SparseChannelMatrix sparsify_for_mp(std::span<const cplx> dense, int dim, double energy_keep);

// Per-link build + sparsify + block placement; avoids materializing the
// full dense MIMO matrix. Row energies are per link, so the kept fraction
// still bounds the truncation of every MIMO row.
SparseChannelMatrix build_H_mimo_ofdm_sparse(const MimoChannel& channel, const OfdmDims& dims,
                                             double energy_keep);

} // namespace ddsim
