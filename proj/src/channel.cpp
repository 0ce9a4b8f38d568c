#include "ddsim/channel.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ddsim {

ChannelProfile ChannelProfile::default_profile() {
    ChannelProfile p;
    p.paths = {
        {2.08e-6, 0.0, std::nullopt},
        {4.164e-6, 470.0, std::nullopt},
        {6.246e-6, 940.0, std::nullopt},
        {8.328e-6, 1410.0, std::nullopt},
        {10.41e-6, 1880.0, std::nullopt},
    };
    return p;
}

ChannelProfile ChannelProfile::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open channel profile: " + file.string());
    ChannelProfile profile;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double delay_us, doppler_hz;
        if (!(ss >> delay_us)) continue;   // blank or comment-only line
        if (!(ss >> doppler_hz))
            throw std::runtime_error("channel profile line " + std::to_string(lineno) +
                                     ": expected delay_us doppler_hz [gain_re gain_im]");
        ProfilePath path;
        path.delay_s = delay_us * 1e-6;
        path.doppler_hz = doppler_hz;
        double re, im;
        if (ss >> re) {
            if (!(ss >> im))
                throw std::runtime_error("channel profile line " + std::to_string(lineno) +
                                         ": gain needs both re and im");
            path.fixed_gain = cplx(re, im);
        }
        profile.paths.push_back(path);
    }
    if (profile.paths.empty())
        throw std::runtime_error("channel profile is empty: " + file.string());
    return profile;
}

std::vector<TapSupport> taps_from_profile(const ChannelProfile& profile, const GridDims& dims) {
    constexpr double kMaxRoundingError = 0.1;   // fraction of a tap
    std::vector<TapSupport> taps;
    taps.reserve(profile.paths.size());
    std::set<std::pair<int, int>> seen;
    for (const auto& path : profile.paths) {
        const double alpha_exact = path.delay_s / dims.delay_resolution_s();
        const double beta_exact = path.doppler_hz / dims.doppler_resolution_hz();
        const double alpha_round = std::round(alpha_exact);
        const double beta_round = std::round(beta_exact);
        if (std::abs(alpha_exact - alpha_round) > kMaxRoundingError ||
            std::abs(beta_exact - beta_round) > kMaxRoundingError)
            throw std::invalid_argument(
                "channel path does not fall on an integer delay-Doppler tap "
                "(fractional taps are unsupported)");
        const int alpha = static_cast<int>(alpha_round);
        const int beta = static_cast<int>(beta_round);
        if (alpha < 0 || alpha >= dims.delay_bins || beta < 0 || beta >= dims.doppler_bins)
            throw std::invalid_argument("channel path tap outside the grid span");
        if (!seen.insert({alpha, beta}).second)
            throw std::invalid_argument("duplicate (delay, Doppler) tap in profile");
        taps.push_back({alpha, beta, path.fixed_gain});
    }
    return taps;
}

cplx effective_gain(const PathTap& tap, const GridDims& dims) {
    const double phase = -kTwoPi * static_cast<double>(tap.delay_tap) *
                         static_cast<double>(tap.doppler_tap) /
                         static_cast<double>(dims.frame_size());
    return tap.gain * std::polar(1.0, phase);
}

MimoChannel gen_random_mimo_channel(Rng& rng, std::span<const TapSupport> support, int antennas) {
    if (support.empty()) throw std::invalid_argument("channel support must have P >= 1 taps");
    if (antennas < 1) throw std::invalid_argument("antennas must be >= 1");
    MimoChannel channel;
    channel.antennas = antennas;
    channel.links.resize(static_cast<size_t>(antennas) * static_cast<size_t>(antennas));
    const double tap_std = 1.0 / std::sqrt(static_cast<double>(support.size()));
    for (auto& link : channel.links) {
        link.taps.reserve(support.size());
        for (const auto& s : support) {
            const cplx gain = s.fixed_gain ? *s.fixed_gain : tap_std * rng.cnormal();
            link.taps.push_back({s.delay_tap, s.doppler_tap, gain});
        }
    }
    return channel;
}

namespace {

void add_link_entries(SparseChannelMatrix& H, const LinkChannel& link, const GridDims& dims,
                      int row_offset, int col_offset) {
    const int n = dims.doppler_bins;
    const int m = dims.delay_bins;
    for (const auto& tap : link.taps) {
        if (tap.delay_tap < 0 || tap.delay_tap >= m || tap.doppler_tap < 0 ||
            tap.doppler_tap >= n)
            throw std::invalid_argument("tap index outside the grid");
        const cplx value = effective_gain(tap, dims);
        for (int l = 0; l < m; ++l) {
            const int src_l = (l - tap.delay_tap + m) % m;
            for (int k = 0; k < n; ++k) {
                const int src_k = (k - tap.doppler_tap + n) % n;
                H.add_entry(row_offset + k + n * l, col_offset + src_k + n * src_l, value);
            }
        }
    }
}

} // namespace

SparseChannelMatrix build_H_link(const LinkChannel& link, const GridDims& dims) {
    SparseChannelMatrix H(dims.frame_size());
    add_link_entries(H, link, dims, 0, 0);
    H.finalize();   // rejects duplicate (alpha, beta) taps via entry collision
    return H;
}

SparseChannelMatrix build_H_mimo(const MimoChannel& channel, const GridDims& dims) {
    const int block = dims.frame_size();
    const int n_a = channel.antennas;
    if (channel.links.size() != static_cast<size_t>(n_a) * static_cast<size_t>(n_a))
        throw std::invalid_argument("MimoChannel: links array must be antennas^2");
    SparseChannelMatrix H(n_a * block);
    for (int rx = 0; rx < n_a; ++rx)
        for (int tx = 0; tx < n_a; ++tx)
            add_link_entries(H, channel.link(rx, tx), dims, rx * block, tx * block);
    H.finalize();
    return H;
}

std::vector<cplx> apply_channel(const SparseChannelMatrix& H, std::span<const cplx> x,
                                double noise_std, Rng& rng) {
    std::vector<cplx> y = H.apply(x);
    if (noise_std > 0.0) {
        for (auto& v : y) v += noise_std * rng.cnormal();
    }
    return y;
}

} // namespace ddsim
