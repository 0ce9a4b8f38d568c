// chanest.hpp - Channel estimation from delay-Doppler impulse pilots.
//
// Each transmit antenna sends one frame carrying a single impulse of
// amplitude A; the received neighborhood of each impulse is a direct readout
// of that link's effective tap gains. With enough cyclic spacing between
// impulse locations the per-link responses land in disjoint regions of every
// receive grid, so one pilot frame sounds all antenna pairs at once. Cells
// are kept when they clear a threshold scaled from a noise floor measured on
// cells outside every guard region; the kept values rebuild the equivalent
// channel matrix in the same form the true-channel assembly produces.

#pragma once

#include "ddsim/channel.hpp"
#include "ddsim/grid.hpp"
#include "ddsim/sparse.hpp"

#include <span>
#include <vector>

namespace ddsim {

struct PilotPlan {
    struct Pilot {
        int doppler_bin;   // n_p
        int delay_bin;     // m_p
    };

    std::vector<Pilot> pilots;   // one per transmit antenna
    double amplitude = 1.0;      // A > 0
    int guard_doppler = 0;       // readout extent along Doppler (R_beta)
    int guard_delay = 0;         // readout extent along delay (R_alpha)
    double threshold_sigmas = 3.0;

    // Pilots on a regular lattice with maximal cyclic separation; guard
    // extents fill the lattice cell.
    static PilotPlan regular(const GridDims& dims, int antennas, double amplitude = 1.0);

    // Guard boxes must be pairwise disjoint on the cyclic grid.
    void validate(const GridDims& dims) const;

    // True when every channel tap of the given support falls inside the
    // guard extents (nothing the readout would miss).
    bool covers(std::span<const TapSupport> support) const;
};

struct TapEstimate {
    int doppler_off;   // offset from the pilot location = Doppler tap
    int delay_off;     //                                = delay tap
    cplx value;        // estimated effective gain h'
};

struct ChannelEstimate {
    int antennas = 1;
    std::vector<std::vector<TapEstimate>> links;   // [rx * antennas + tx]
    std::vector<double> noise_floor;               // per receive antenna, sigma-hat

    const std::vector<TapEstimate>& link(int rx, int tx) const {
        return links[static_cast<size_t>(rx) * static_cast<size_t>(antennas) +
                     static_cast<size_t>(tx)];
    }
    bool degenerate() const;   // every link empty
};

// Per-antenna pilot frames: amplitude A at the planned cell, zero elsewhere.
std::vector<DdGrid> make_pilot_frames(const PilotPlan& plan, const GridDims& dims, int antennas);

// Reads each (rx, tx) guard region of the received grids, divides by A, and
// keeps cells with |value| above threshold_sigmas * noise floor. The floor
// is a scaled median absolute deviation over cells outside all guard
// regions; throws if no such cells exist.
ChannelEstimate estimate_links(std::span<const DdGrid> received, const PilotPlan& plan,
                               const GridDims& dims);

// Equivalent-matrix assembly from estimated taps; values are placed as-is
// (the readout already yields phase-included effective gains).
SparseChannelMatrix assemble_H_est(const ChannelEstimate& estimate, const GridDims& dims);

// Support mismatch against a known channel, for fixture scoring.
struct SupportErrors {
    int false_positives = 0;   // estimated taps not in the true support
    int false_negatives = 0;   // true taps missing from the estimate
};
SupportErrors count_support_errors(const ChannelEstimate& estimate, const MimoChannel& truth);

inline double frobenius_error(const SparseChannelMatrix& truth, const SparseChannelMatrix& est) {
    return frobenius_distance(truth, est);
}

} // namespace ddsim
