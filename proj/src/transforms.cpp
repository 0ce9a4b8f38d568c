#include "ddsim/transforms.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ddsim {

namespace {

// e^{+j 2 pi t / n} for t in [0, n)
std::vector<cplx> twiddle_table(int n) {
    std::vector<cplx> w(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t)
        w[static_cast<size_t>(t)] = std::polar(1.0, kTwoPi * t / n);
    return w;
}

} // namespace

TfGrid isfft(const DdGrid& x) {
    const GridDims& dims = x.dims();
    const int n_bins = dims.doppler_bins;
    const int m_bins = dims.delay_bins;
    const auto wn = twiddle_table(n_bins);
    const auto wm = twiddle_table(m_bins);

    // Factor the double sum: Doppler axis first, then delay axis.
    std::vector<cplx> partial(static_cast<size_t>(n_bins) * static_cast<size_t>(m_bins));
    for (int l = 0; l < m_bins; ++l) {
        for (int n = 0; n < n_bins; ++n) {
            cplx acc(0.0, 0.0);
            for (int k = 0; k < n_bins; ++k)
                acc += x.at(k, l) * wn[static_cast<size_t>((n * k) % n_bins)];
            partial[static_cast<size_t>(n) + static_cast<size_t>(n_bins) * l] = acc;
        }
    }
    TfGrid X(dims);
    const double scale = 1.0 / static_cast<double>(dims.frame_size());
    for (int n = 0; n < n_bins; ++n) {
        for (int m = 0; m < m_bins; ++m) {
            cplx acc(0.0, 0.0);
            for (int l = 0; l < m_bins; ++l)
                acc += partial[static_cast<size_t>(n) + static_cast<size_t>(n_bins) * l] *
                       std::conj(wm[static_cast<size_t>((m * l) % m_bins)]);
            X.at(n, m) = scale * acc;
        }
    }
    return X;
}

DdGrid sfft(const TfGrid& X) {
    const GridDims& dims = X.dims();
    const int n_bins = dims.doppler_bins;
    const int m_bins = dims.delay_bins;
    const auto wn = twiddle_table(n_bins);
    const auto wm = twiddle_table(m_bins);

    std::vector<cplx> partial(static_cast<size_t>(n_bins) * static_cast<size_t>(m_bins));
    for (int m = 0; m < m_bins; ++m) {
        for (int k = 0; k < n_bins; ++k) {
            cplx acc(0.0, 0.0);
            for (int n = 0; n < n_bins; ++n)
                acc += X.at(n, m) * std::conj(wn[static_cast<size_t>((n * k) % n_bins)]);
            partial[static_cast<size_t>(k) + static_cast<size_t>(n_bins) * m] = acc;
        }
    }
    DdGrid x(dims);
    for (int k = 0; k < n_bins; ++k) {
        for (int l = 0; l < m_bins; ++l) {
            cplx acc(0.0, 0.0);
            for (int m = 0; m < m_bins; ++m)
                acc += partial[static_cast<size_t>(k) + static_cast<size_t>(n_bins) * m] *
                       wm[static_cast<size_t>((m * l) % m_bins)];
            x.at(k, l) = acc;
        }
    }
    return x;
}

TimeFrame heisenberg_rect(const TfGrid& X) {
    const GridDims& dims = X.dims();
    const int n_bins = dims.doppler_bins;
    const int m_bins = dims.delay_bins;
    const auto wm = twiddle_table(m_bins);
    std::vector<cplx> samples(static_cast<size_t>(dims.frame_size()));
    for (int n = 0; n < n_bins; ++n) {
        for (int q = 0; q < m_bins; ++q) {
            cplx acc(0.0, 0.0);
            for (int m = 0; m < m_bins; ++m)
                acc += X.at(n, m) * wm[static_cast<size_t>((m * q) % m_bins)];
            samples[static_cast<size_t>(n) * static_cast<size_t>(m_bins) +
                    static_cast<size_t>(q)] = acc;
        }
    }
    return TimeFrame(dims, std::move(samples));
}

TfGrid wigner_rect(const TimeFrame& y) {
    const GridDims& dims = y.dims;
    const int n_bins = dims.doppler_bins;
    const int m_bins = dims.delay_bins;
    const auto wm = twiddle_table(m_bins);
    TfGrid Y(dims);
    const double scale = 1.0 / static_cast<double>(m_bins);
    for (int n = 0; n < n_bins; ++n) {
        for (int m = 0; m < m_bins; ++m) {
            cplx acc(0.0, 0.0);
            for (int q = 0; q < m_bins; ++q)
                acc += y.samples[static_cast<size_t>(n) * static_cast<size_t>(m_bins) +
                                 static_cast<size_t>(q)] *
                       std::conj(wm[static_cast<size_t>((m * q) % m_bins)]);
            Y.at(n, m) = scale * acc;
        }
    }
    return Y;
}

TfGrid tf_channel_gains(std::span<const PathTap> taps, const GridDims& dims) {
    const int n_bins = dims.doppler_bins;
    const int m_bins = dims.delay_bins;
    TfGrid H(dims);
    for (const auto& tap : taps) {
        const cplx base = effective_gain(tap, dims);
        for (int n = 0; n < n_bins; ++n) {
            const cplx doppler_phase =
                std::polar(1.0, kTwoPi * tap.doppler_tap * n / static_cast<double>(n_bins));
            for (int m = 0; m < m_bins; ++m) {
                const cplx delay_phase =
                    std::polar(1.0, -kTwoPi * tap.delay_tap * m / static_cast<double>(m_bins));
                H.at(n, m) += base * doppler_phase * delay_phase;
            }
        }
    }
    return H;
}

DdGrid oracle_apply(const DdGrid& x, std::span<const PathTap> taps) {
    const GridDims& dims = x.dims();
    TfGrid X = isfft(x);
    const TfGrid H = tf_channel_gains(taps, dims);
    for (int n = 0; n < dims.doppler_bins; ++n)
        for (int m = 0; m < dims.delay_bins; ++m) X.at(n, m) *= H.at(n, m);
    return sfft(X);
}

} // namespace ddsim
