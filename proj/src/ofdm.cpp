#include "ddsim/ofdm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ddsim {

OfdmDims OfdmDims::for_taps(const GridDims& grid, std::span<const PathTap> taps) {
    int max_delay = 0;
    for (const auto& tap : taps) max_delay = std::max(max_delay, tap.delay_tap);
    return OfdmDims(grid, max_delay);
}

TimeDelayMatrix::TimeDelayMatrix(int order, std::vector<Band> bands)
    : order_(order), bands_(std::move(bands)) {
    if (order < 1) throw std::invalid_argument("TimeDelayMatrix: order must be >= 1");
    for (const auto& band : bands_) {
        if (band.delay < 0 || band.delay >= order)
            throw std::invalid_argument("TimeDelayMatrix: band delay out of range");
        if (band.values.size() != static_cast<size_t>(order))
            throw std::invalid_argument("TimeDelayMatrix: band length must equal order");
    }
}

cplx TimeDelayMatrix::entry(int row, int col) const {
    if (row < 0 || row >= order_ || col < 0 || col >= order_) return {0.0, 0.0};
    const int delay = row - col;
    for (const auto& band : bands_)
        if (band.delay == delay) return band.values[static_cast<size_t>(row)];
    return {0.0, 0.0};
}

std::vector<cplx> TimeDelayMatrix::apply(std::span<const cplx> x) const {
    if (x.size() != static_cast<size_t>(order_))
        throw std::invalid_argument("TimeDelayMatrix::apply: dimension mismatch");
    std::vector<cplx> y(static_cast<size_t>(order_));
    for (const auto& band : bands_)
        for (int r = band.delay; r < order_; ++r)
            y[static_cast<size_t>(r)] +=
                band.values[static_cast<size_t>(r)] * x[static_cast<size_t>(r - band.delay)];
    return y;
}

TimeDelayMatrix build_Htd(std::span<const PathTap> taps, const OfdmDims& dims) {
    for (const auto& tap : taps)
        if (tap.delay_tap > dims.cyclic_prefix)
            throw std::invalid_argument("delay spread exceeds the cyclic prefix");
    const int order = dims.frame_samples();
    const double cycles_per_sample = 1.0 / static_cast<double>(dims.grid.frame_size());
    // Distinct taps can share a delay; their phase ramps add on one band.
    std::map<int, std::vector<cplx>> bands;
    for (const auto& tap : taps) {
        auto& values = bands.try_emplace(tap.delay_tap, static_cast<size_t>(order)).first->second;
        for (int r = tap.delay_tap; r < order; ++r)
            values[static_cast<size_t>(r)] +=
                tap.gain *
                std::polar(1.0, kTwoPi * tap.doppler_tap * r * cycles_per_sample);
    }
    std::vector<TimeDelayMatrix::Band> band_list;
    band_list.reserve(bands.size());
    for (auto& [delay, values] : bands) band_list.push_back({delay, std::move(values)});
    return TimeDelayMatrix(order, std::move(band_list));
}

std::vector<cplx> unitary_dft_matrix(int m) {
    std::vector<cplx> w(static_cast<size_t>(m) * static_cast<size_t>(m));
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (int row = 0; row < m; ++row)
        for (int q = 0; q < m; ++q)
            w[static_cast<size_t>(row) * static_cast<size_t>(m) + static_cast<size_t>(q)] =
                scale * std::polar(1.0, -kTwoPi * row * q / static_cast<double>(m));
    return w;
}

std::vector<cplx> build_H_ofdm(const TimeDelayMatrix& H_td, const OfdmDims& dims) {
    const int m = dims.grid.delay_bins;
    const int n = dims.grid.doppler_bins;
    const int cp = dims.cyclic_prefix;
    const int l = dims.block_len();
    if (H_td.order() != dims.frame_samples())
        throw std::invalid_argument("build_H_ofdm: time-delay matrix order mismatch");
    const int dim = n * m;
    std::vector<cplx> H(static_cast<size_t>(dim) * static_cast<size_t>(dim));
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

    // The CP confines each transmit block's influence to its own kept
    // samples, so the matrix is block diagonal; build one M x M block per
    // OFDM symbol by passing each subcarrier through the sample-domain chain.
    std::vector<cplx> tx(static_cast<size_t>(l));       // CP-extended block for subcarrier m'
    std::vector<cplx> rx(static_cast<size_t>(m));       // kept samples after the channel
    for (int block = 0; block < n; ++block) {
        const int sample0 = block * l;
        for (int sub_in = 0; sub_in < m; ++sub_in) {
            // IDFT column with CP: phase continues across the prefix.
            for (int u = 0; u < l; ++u)
                tx[static_cast<size_t>(u)] =
                    inv_sqrt_m *
                    std::polar(1.0, kTwoPi * sub_in * (u - cp) / static_cast<double>(m));
            std::fill(rx.begin(), rx.end(), cplx(0.0, 0.0));
            for (const auto& band : H_td.bands()) {
                for (int u = cp; u < l; ++u) {
                    const int src = u - band.delay;
                    rx[static_cast<size_t>(u - cp)] +=
                        band.values[static_cast<size_t>(sample0 + u)] *
                        tx[static_cast<size_t>(src)];
                }
            }
            for (int sub_out = 0; sub_out < m; ++sub_out) {
                cplx acc(0.0, 0.0);
                for (int qq = 0; qq < m; ++qq)
                    acc += rx[static_cast<size_t>(qq)] *
                           std::polar(1.0, -kTwoPi * sub_out * qq / static_cast<double>(m));
                const int row = block * m + sub_out;
                const int col = block * m + sub_in;
                H[static_cast<size_t>(row) * static_cast<size_t>(dim) +
                  static_cast<size_t>(col)] = inv_sqrt_m * acc;
            }
        }
    }
    return H;
}

namespace {

std::vector<cplx> dense_mul(const std::vector<cplx>& a, int ra, int ca,
                            const std::vector<cplx>& b, int rb, int cb) {
    if (ca != rb) throw std::invalid_argument("dense_mul: shape mismatch");
    std::vector<cplx> out(static_cast<size_t>(ra) * static_cast<size_t>(cb));
    for (int i = 0; i < ra; ++i) {
        for (int k = 0; k < ca; ++k) {
            const cplx aik = a[static_cast<size_t>(i) * static_cast<size_t>(ca) +
                              static_cast<size_t>(k)];
            if (aik == cplx(0.0, 0.0)) continue;
            for (int j = 0; j < cb; ++j)
                out[static_cast<size_t>(i) * static_cast<size_t>(cb) + static_cast<size_t>(j)] +=
                    aik * b[static_cast<size_t>(k) * static_cast<size_t>(cb) +
                            static_cast<size_t>(j)];
        }
    }
    return out;
}

} // namespace

std::vector<cplx> build_H_ofdm_reference(const TimeDelayMatrix& H_td, const OfdmDims& dims) {
    const int m = dims.grid.delay_bins;
    const int n = dims.grid.doppler_bins;
    const int cp = dims.cyclic_prefix;
    const int l = dims.block_len();
    const int dim = n * m;
    const int samples = n * l;

    // B_cpin: block diagonal of T_cp = [C_cp; I_M], C_cp = last CP rows of I_M.
    std::vector<cplx> cpin(static_cast<size_t>(samples) * static_cast<size_t>(dim));
    for (int block = 0; block < n; ++block)
        for (int u = 0; u < l; ++u) {
            const int src = (u < cp) ? (m - cp + u) : (u - cp);
            cpin[static_cast<size_t>(block * l + u) * static_cast<size_t>(dim) +
                 static_cast<size_t>(block * m + src)] = 1.0;
        }

    // B_cpre: block diagonal of R_cp = [0 | I_M].
    std::vector<cplx> cpre(static_cast<size_t>(dim) * static_cast<size_t>(samples));
    for (int block = 0; block < n; ++block)
        for (int row = 0; row < m; ++row)
            cpre[static_cast<size_t>(block * m + row) * static_cast<size_t>(samples) +
                 static_cast<size_t>(block * l + cp + row)] = 1.0;

    // D and D^H: block diagonal of the unitary DFT and its adjoint.
    const auto w = unitary_dft_matrix(m);
    std::vector<cplx> dft(static_cast<size_t>(dim) * static_cast<size_t>(dim));
    std::vector<cplx> idft(static_cast<size_t>(dim) * static_cast<size_t>(dim));
    for (int block = 0; block < n; ++block)
        for (int row = 0; row < m; ++row)
            for (int col = 0; col < m; ++col) {
                const cplx v =
                    w[static_cast<size_t>(row) * static_cast<size_t>(m) +
                      static_cast<size_t>(col)];
                dft[static_cast<size_t>(block * m + row) * static_cast<size_t>(dim) +
                    static_cast<size_t>(block * m + col)] = v;
                idft[static_cast<size_t>(block * m + col) * static_cast<size_t>(dim) +
                     static_cast<size_t>(block * m + row)] = std::conj(v);
            }

    std::vector<cplx> td(static_cast<size_t>(samples) * static_cast<size_t>(samples));
    for (int r = 0; r < samples; ++r)
        for (int c = 0; c < samples; ++c)
            td[static_cast<size_t>(r) * static_cast<size_t>(samples) + static_cast<size_t>(c)] =
                H_td.entry(r, c);

    auto step = dense_mul(td, samples, samples, cpin, samples, dim);
    step = dense_mul(cpre, dim, samples, step, samples, dim);
    step = dense_mul(step, dim, dim, idft, dim, dim);
    return dense_mul(dft, dim, dim, step, dim, dim);
}

std::vector<cplx> build_H_mimo_ofdm(const MimoChannel& channel, const OfdmDims& dims) {
    const int block = dims.grid.frame_size();
    const int n_a = channel.antennas;
    const int dim = n_a * block;
    std::vector<cplx> H(static_cast<size_t>(dim) * static_cast<size_t>(dim));
    for (int rx = 0; rx < n_a; ++rx) {
        for (int tx = 0; tx < n_a; ++tx) {
            const auto link = build_H_ofdm(build_Htd(channel.link(rx, tx).taps, dims), dims);
            for (int r = 0; r < block; ++r)
                for (int c = 0; c < block; ++c)
                    H[static_cast<size_t>(rx * block + r) * static_cast<size_t>(dim) +
                      static_cast<size_t>(tx * block + c)] =
                        link[static_cast<size_t>(r) * static_cast<size_t>(block) +
                             static_cast<size_t>(c)];
        }
    }
    return H;
}

namespace {

void sparsify_rows_into(SparseChannelMatrix& out, std::span<const cplx> dense, int rows,
                        int cols, double energy_keep, int row_offset, int col_offset) {
    std::vector<std::pair<double, int>> order;   // (|v|^2, col), sorted descending
    for (int r = 0; r < rows; ++r) {
        const cplx* row = dense.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
        order.clear();
        double total = 0.0;
        for (int c = 0; c < cols; ++c) {
            const double e = std::norm(row[c]);
            if (e > 0.0) {
                order.emplace_back(e, c);
                total += e;
            }
        }
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        double kept = 0.0;
        for (const auto& [energy, c] : order) {
            // energy_keep == 1 keeps every nonzero; the running sum could
            // otherwise hit the total early through rounding.
            if (energy_keep < 1.0 && kept >= energy_keep * total) break;
            out.add_entry(row_offset + r, col_offset + c, row[c]);
            kept += energy;
        }
    }
}

} // namespace

SparseChannelMatrix sparsify_for_mp(std::span<const cplx> dense, int dim, double energy_keep) {
    if (!(energy_keep > 0.0) || energy_keep > 1.0)
        throw std::invalid_argument("energy_keep must be in (0, 1]");
    if (dense.size() != static_cast<size_t>(dim) * static_cast<size_t>(dim))
        throw std::invalid_argument("sparsify_for_mp: dense size mismatch");
    SparseChannelMatrix out(dim);
    sparsify_rows_into(out, dense, dim, dim, energy_keep, 0, 0);
    out.finalize();
    return out;
}

SparseChannelMatrix build_H_mimo_ofdm_sparse(const MimoChannel& channel, const OfdmDims& dims,
                                             double energy_keep) {
    if (!(energy_keep > 0.0) || energy_keep > 1.0)
        throw std::invalid_argument("energy_keep must be in (0, 1]");
    const int block = dims.grid.frame_size();
    const int n_a = channel.antennas;
    SparseChannelMatrix out(n_a * block);
    for (int rx = 0; rx < n_a; ++rx) {
        for (int tx = 0; tx < n_a; ++tx) {
            const auto link = build_H_ofdm(build_Htd(channel.link(rx, tx).taps, dims), dims);
            sparsify_rows_into(out, link, block, block, energy_keep, rx * block, tx * block);
        }
    }
    out.finalize();
    return out;
}

} // namespace ddsim
