// grid.hpp - Delay-Doppler / time-frequency grid types and vectorization.
//
// A frame is an N x M complex grid: N Doppler bins by M delay bins in the
// delay-Doppler domain, or N symbols by M subcarriers in the time-frequency
// domain. The vectorization convention is index = k + N*l (Doppler-major),
// used consistently by the channel matrices and the detector.

#pragma once

#include "ddsim/types.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace ddsim {

// Frame geometry. The multicarrier symbol time T is tied to the subcarrier
// spacing (T = 1/delta_f, critical sampling with rectangular pulses), so it
// is derived rather than stored.
struct GridDims {
    int doppler_bins;               // N
    int delay_bins;                 // M
    double subcarrier_spacing_hz;   // delta_f

    GridDims(int n, int m, double delta_f_hz)
        : doppler_bins(n), delay_bins(m), subcarrier_spacing_hz(delta_f_hz) {
        if (n < 1 || m < 1)
            throw std::invalid_argument("GridDims: bins must be >= 1");
        if (!(delta_f_hz > 0.0))
            throw std::invalid_argument("GridDims: subcarrier spacing must be > 0");
    }

    double symbol_time_s() const { return 1.0 / subcarrier_spacing_hz; }
    int frame_size() const { return doppler_bins * delay_bins; }
    double delay_resolution_s() const {
        return 1.0 / (delay_bins * subcarrier_spacing_hz);
    }
    double doppler_resolution_hz() const {
        return 1.0 / (doppler_bins * symbol_time_s());
    }

    bool operator==(const GridDims&) const = default;
};

// index = k + N*l, bijective onto [0, N*M)
inline int vec_index(int k, int l, const GridDims& dims) {
    if (k < 0 || k >= dims.doppler_bins || l < 0 || l >= dims.delay_bins)
        throw std::invalid_argument("vec_index: index out of range");
    return k + dims.doppler_bins * l;
}

inline std::pair<int, int> unvec_index(int idx, const GridDims& dims) {
    if (idx < 0 || idx >= dims.frame_size())
        throw std::invalid_argument("unvec_index: index out of range");
    return {idx % dims.doppler_bins, idx / dims.doppler_bins};
}

namespace detail {

// One storage layout for both domains; the tag keeps delay-Doppler and
// time-frequency grids from being mixed up in signatures.
template <class Tag>
class Grid {
public:
    explicit Grid(const GridDims& dims)
        : dims_(dims), data_(static_cast<size_t>(dims.frame_size())) {}

    Grid(const GridDims& dims, std::vector<cplx> data)
        : dims_(dims), data_(std::move(data)) {
        if (data_.size() != static_cast<size_t>(dims_.frame_size()))
            throw std::invalid_argument("Grid: data length does not match dims");
    }

    const GridDims& dims() const { return dims_; }

    // Element (first, second) where first is the Doppler/symbol index in
    // [0,N) and second is the delay/subcarrier index in [0,M). Storage is
    // the vectorized order first + N*second.
    cplx& at(int first, int second) {
        return data_[static_cast<size_t>(vec_index(first, second, dims_))];
    }
    const cplx& at(int first, int second) const {
        return data_[static_cast<size_t>(vec_index(first, second, dims_))];
    }

    std::span<const cplx> data() const { return data_; }
    std::span<cplx> data() { return data_; }

    bool operator==(const Grid&) const = default;

private:
    GridDims dims_;
    std::vector<cplx> data_;
};

struct DelayDopplerTag {};
struct TimeFreqTag {};

} // namespace detail

using DdGrid = detail::Grid<detail::DelayDopplerTag>;   // x[k,l], y[k,l]
using TfGrid = detail::Grid<detail::TimeFreqTag>;       // X[n,m], Y[n,m]

// One frame of N*M time samples at sample period 1/(M*delta_f).
struct TimeFrame {
    GridDims dims;
    std::vector<cplx> samples;

    TimeFrame(const GridDims& d, std::vector<cplx> s)
        : dims(d), samples(std::move(s)) {
        if (samples.size() != static_cast<size_t>(dims.frame_size()))
            throw std::invalid_argument("TimeFrame: sample count must be N*M");
    }

    double sample_period_s() const { return dims.delay_resolution_s(); }
};

inline std::vector<cplx> vectorize(const DdGrid& frame) {
    return {frame.data().begin(), frame.data().end()};
}

inline DdGrid unvectorize(std::span<const cplx> v, const GridDims& dims) {
    if (v.size() != static_cast<size_t>(dims.frame_size()))
        throw std::invalid_argument("unvectorize: length mismatch");
    return DdGrid(dims, std::vector<cplx>(v.begin(), v.end()));
}

} // namespace ddsim
