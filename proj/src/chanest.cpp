#include "ddsim/chanest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ddsim {

namespace {

// Median |component| of a zero-mean Gaussian is 0.6745 of its std.
constexpr double kMadToStd = 1.0 / 0.6744897501960817;

bool cyclic_intervals_overlap(int start_a, int len_a, int start_b, int len_b, int period) {
    // Intervals [start, start+len) on Z mod period; len <= period.
    const int diff = ((start_b - start_a) % period + period) % period;
    return diff < len_a || period - diff < len_b;
}

} // namespace

PilotPlan PilotPlan::regular(const GridDims& dims, int antennas, double amplitude) {
    if (antennas < 1) throw std::invalid_argument("PilotPlan: antennas must be >= 1");
    // Lattice with at least one unused cell, so noise-floor cells always
    // exist outside the guard regions.
    const int cells = antennas + 1;
    int rows = 1;
    while (rows * rows < cells) ++rows;
    const int cols = (cells + rows - 1) / rows;
    if (rows > dims.doppler_bins || cols > dims.delay_bins)
        throw std::invalid_argument("PilotPlan: grid too small for this many pilots");

    PilotPlan plan;
    plan.amplitude = amplitude;
    const int step_doppler = dims.doppler_bins / rows;
    const int step_delay = dims.delay_bins / cols;
    plan.guard_doppler = step_doppler - 1;
    plan.guard_delay = step_delay - 1;
    // Diagonal-first cell order maximizes the separation of the first few
    // pilots (two antennas split the grid corner-to-center).
    for (int p = 0, c = 0; c < cols && p < antennas; ++c)
        for (int r = 0; r < rows && p < antennas; ++r, ++p)
            plan.pilots.push_back({r * step_doppler, ((r + c) % cols) * step_delay});
    plan.validate(dims);
    return plan;
}

void PilotPlan::validate(const GridDims& dims) const {
    if (pilots.empty()) throw std::invalid_argument("PilotPlan: no pilots");
    if (!(amplitude > 0.0)) throw std::invalid_argument("PilotPlan: amplitude must be > 0");
    if (guard_doppler < 0 || guard_doppler >= dims.doppler_bins || guard_delay < 0 ||
        guard_delay >= dims.delay_bins)
        throw std::invalid_argument("PilotPlan: guard extents exceed the grid");
    if (!(threshold_sigmas >= 0.0))
        throw std::invalid_argument("PilotPlan: threshold must be >= 0");
    for (const auto& pilot : pilots)
        if (pilot.doppler_bin < 0 || pilot.doppler_bin >= dims.doppler_bins ||
            pilot.delay_bin < 0 || pilot.delay_bin >= dims.delay_bins)
            throw std::invalid_argument("PilotPlan: pilot location outside the grid");
    for (size_t i = 0; i < pilots.size(); ++i) {
        for (size_t j = i + 1; j < pilots.size(); ++j) {
            const bool doppler_hit =
                cyclic_intervals_overlap(pilots[i].doppler_bin, guard_doppler + 1,
                                         pilots[j].doppler_bin, guard_doppler + 1,
                                         dims.doppler_bins);
            const bool delay_hit =
                cyclic_intervals_overlap(pilots[i].delay_bin, guard_delay + 1,
                                         pilots[j].delay_bin, guard_delay + 1,
                                         dims.delay_bins);
            if (doppler_hit && delay_hit)
                throw std::invalid_argument("PilotPlan: guard regions overlap");
        }
    }
}

bool PilotPlan::covers(std::span<const TapSupport> support) const {
    for (const auto& tap : support)
        if (tap.doppler_tap > guard_doppler || tap.delay_tap > guard_delay) return false;
    return true;
}

bool ChannelEstimate::degenerate() const {
    for (const auto& link : links)
        if (!link.empty()) return false;
    return true;
}

std::vector<DdGrid> make_pilot_frames(const PilotPlan& plan, const GridDims& dims,
                                      int antennas) {
    plan.validate(dims);
    if (plan.pilots.size() != static_cast<size_t>(antennas))
        throw std::invalid_argument("make_pilot_frames: plan has wrong pilot count");
    std::vector<DdGrid> frames;
    frames.reserve(static_cast<size_t>(antennas));
    for (int p = 0; p < antennas; ++p) {
        DdGrid grid(dims);
        grid.at(plan.pilots[static_cast<size_t>(p)].doppler_bin,
                plan.pilots[static_cast<size_t>(p)].delay_bin) = plan.amplitude;
        frames.push_back(std::move(grid));
    }
    return frames;
}

ChannelEstimate estimate_links(std::span<const DdGrid> received, const PilotPlan& plan,
                               const GridDims& dims) {
    plan.validate(dims);
    const int n_rx = static_cast<int>(received.size());
    const int n_tx = static_cast<int>(plan.pilots.size());
    if (n_rx < 1) throw std::invalid_argument("estimate_links: no received grids");

    // Cells inside any pilot's guard box carry channel response; everything
    // else is noise-only and feeds the floor estimate.
    std::vector<bool> in_guard(static_cast<size_t>(dims.frame_size()), false);
    for (const auto& pilot : plan.pilots)
        for (int db = 0; db <= plan.guard_doppler; ++db)
            for (int da = 0; da <= plan.guard_delay; ++da) {
                const int k = (pilot.doppler_bin + db) % dims.doppler_bins;
                const int l = (pilot.delay_bin + da) % dims.delay_bins;
                in_guard[static_cast<size_t>(vec_index(k, l, dims))] = true;
            }
    if (std::find(in_guard.begin(), in_guard.end(), false) == in_guard.end())
        throw std::invalid_argument(
            "estimate_links: guard regions cover the whole grid, cannot estimate noise");

    // Rectangular systems are allowed (n_rx receive grids, n_tx pilots);
    // links are stored rx-major with the tx count as stride.
    ChannelEstimate estimate;
    estimate.antennas = n_tx;
    estimate.links.resize(static_cast<size_t>(n_rx) * static_cast<size_t>(n_tx));
    estimate.noise_floor.resize(static_cast<size_t>(n_rx));

    std::vector<double> components;
    for (int rx = 0; rx < n_rx; ++rx) {
        const DdGrid& grid = received[static_cast<size_t>(rx)];
        if (!(grid.dims() == dims))
            throw std::invalid_argument("estimate_links: received grid dims mismatch");

        components.clear();
        for (int idx = 0; idx < dims.frame_size(); ++idx) {
            if (in_guard[static_cast<size_t>(idx)]) continue;
            const cplx v = grid.data()[static_cast<size_t>(idx)];
            components.push_back(std::abs(v.real()));
            components.push_back(std::abs(v.imag()));
        }
        auto mid = components.begin() + static_cast<long>(components.size() / 2);
        std::nth_element(components.begin(), mid, components.end());
        const double sigma = *mid * kMadToStd * std::sqrt(2.0);   // E|v|^2 = sigma^2
        estimate.noise_floor[static_cast<size_t>(rx)] = sigma;

        const double threshold = plan.threshold_sigmas * sigma;
        for (int tx = 0; tx < n_tx; ++tx) {
            const auto& pilot = plan.pilots[static_cast<size_t>(tx)];
            auto& taps = estimate.links[static_cast<size_t>(rx) * static_cast<size_t>(n_tx) +
                                        static_cast<size_t>(tx)];
            for (int db = 0; db <= plan.guard_doppler; ++db) {
                for (int da = 0; da <= plan.guard_delay; ++da) {
                    const int k = (pilot.doppler_bin + db) % dims.doppler_bins;
                    const int l = (pilot.delay_bin + da) % dims.delay_bins;
                    const cplx cell = grid.at(k, l);
                    const double magnitude = std::abs(cell);
                    // Strictly positive keeps the noiseless case exact: a
                    // zero floor must not admit structurally zero cells.
                    if (magnitude >= threshold && magnitude > 0.0)
                        taps.push_back({db, da, cell / plan.amplitude});
                }
            }
        }
    }
    return estimate;
}

SparseChannelMatrix assemble_H_est(const ChannelEstimate& estimate, const GridDims& dims) {
    const int n_tx = estimate.antennas;
    const int n_rx = static_cast<int>(estimate.links.size()) / n_tx;
    if (n_rx != n_tx)
        throw std::invalid_argument("assemble_H_est: needs equal antenna counts");
    const int block = dims.frame_size();
    const int n = dims.doppler_bins;
    const int m = dims.delay_bins;
    SparseChannelMatrix H(n_rx * block);
    for (int rx = 0; rx < n_rx; ++rx) {
        for (int tx = 0; tx < n_tx; ++tx) {
            for (const auto& tap : estimate.link(rx, tx)) {
                for (int l = 0; l < m; ++l) {
                    const int src_l = (l - tap.delay_off + m) % m;
                    for (int k = 0; k < n; ++k) {
                        const int src_k = (k - tap.doppler_off + n) % n;
                        H.add_entry(rx * block + k + n * l, tx * block + src_k + n * src_l,
                                    tap.value);
                    }
                }
            }
        }
    }
    H.finalize();
    return H;
}

SupportErrors count_support_errors(const ChannelEstimate& estimate, const MimoChannel& truth) {
    SupportErrors errors;
    for (int rx = 0; rx < truth.antennas; ++rx) {
        for (int tx = 0; tx < truth.antennas; ++tx) {
            std::set<std::pair<int, int>> true_support;
            for (const auto& tap : truth.link(rx, tx).taps)
                true_support.insert({tap.doppler_tap, tap.delay_tap});
            std::set<std::pair<int, int>> est_support;
            for (const auto& tap : estimate.link(rx, tx))
                est_support.insert({tap.doppler_off, tap.delay_off});
            for (const auto& s : est_support)
                if (!true_support.count(s)) ++errors.false_positives;
            for (const auto& s : true_support)
                if (!est_support.count(s)) ++errors.false_negatives;
        }
    }
    return errors;
}

} // namespace ddsim
