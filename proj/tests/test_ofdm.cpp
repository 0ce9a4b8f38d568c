#include "ddsim/ofdm.hpp"

#include "ddsim/alphabet.hpp"
#include "ddsim/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace ddsim;

namespace {

double max_dev(std::span<const cplx> a, std::span<const cplx> b) {
    double dev = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
    return dev;
}

LinkChannel random_profile_link(Rng& rng, const GridDims& dims) {
    LinkChannel link;
    const auto support = taps_from_profile(ChannelProfile::default_profile(),
                                           GridDims(32, 32, 15e3));
    for (const auto& s : support)
        link.taps.push_back({s.delay_tap % dims.delay_bins, s.doppler_tap % dims.doppler_bins,
                             rng.cnormal() / std::sqrt(5.0)});
    return link;
}

} // namespace

TEST_SUITE_BEGIN("ofdm");

TEST_CASE("cyclic prefix is sized to the delay spread") {
    const GridDims dims(32, 32, 15e3);
    const std::vector<PathTap> taps{{5, 4, cplx(1.0, 0.0)}, {1, 0, cplx(1.0, 0.0)}};
    const OfdmDims ofdm = OfdmDims::for_taps(dims, taps);
    CHECK(ofdm.cyclic_prefix == 5);
    CHECK(ofdm.block_len() == 37);
    CHECK(ofdm.frame_samples() == 32 * 37);
}

TEST_CASE("time-delay matrix of the origin tap is the identity") {
    const GridDims dims(4, 4, 15e3);
    const std::vector<PathTap> taps{{0, 0, cplx(1.0, 0.0)}};
    const OfdmDims ofdm(dims, 0);
    const TimeDelayMatrix H_td = build_Htd(taps, ofdm);
    CHECK(H_td.order() == 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            CHECK(H_td.entry(r, c) == ((r == c) ? cplx(1.0, 0.0) : cplx(0.0, 0.0)));
}

TEST_CASE("a pure unit delay fills the first subdiagonal except row zero") {
    const GridDims dims(2, 4, 15e3);
    const std::vector<PathTap> taps{{1, 0, cplx(1.0, 0.0)}};
    const OfdmDims ofdm(dims, 1);
    const TimeDelayMatrix H_td = build_Htd(taps, ofdm);
    for (int r = 0; r < H_td.order(); ++r)
        for (int c = 0; c < H_td.order(); ++c) {
            const cplx expected = (c == r - 1) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            CHECK(H_td.entry(r, c) == expected);
        }
}

TEST_CASE("a pure Doppler tap produces the sampled phase ramp on the diagonal") {
    const GridDims dims(4, 4, 15e3);
    const std::vector<PathTap> taps{{0, 1, cplx(1.0, 0.0)}};
    const OfdmDims ofdm(dims, 2);
    const TimeDelayMatrix H_td = build_Htd(taps, ofdm);
    for (int r = 0; r < H_td.order(); ++r) {
        const cplx expected = std::polar(1.0, kTwoPi * r / 16.0);   // beta r / (N M)
        CHECK(std::abs(H_td.entry(r, r) - expected) < 1e-12);
    }
}

TEST_CASE("delay spread beyond the prefix is a configuration error") {
    const GridDims dims(4, 4, 15e3);
    const std::vector<PathTap> taps{{3, 0, cplx(1.0, 0.0)}};
    const OfdmDims ofdm(dims, 2);
    CHECK_THROWS_AS(build_Htd(taps, ofdm), std::invalid_argument);
}

TEST_CASE("a static flat link diagonalizes to a scaled identity") {
    const GridDims dims(4, 8, 15e3);
    const cplx gain(0.3, -0.6);
    const std::vector<PathTap> taps{{0, 0, gain}};
    const OfdmDims ofdm = OfdmDims::for_taps(dims, taps);
    const auto H = build_H_ofdm(build_Htd(taps, ofdm), ofdm);
    const int dim = dims.frame_size();
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            const cplx expected = (r == c) ? gain : cplx(0.0, 0.0);
            CHECK(std::abs(H[static_cast<size_t>(r) * static_cast<size_t>(dim) +
                             static_cast<size_t>(c)] -
                           expected) < 1e-12);
        }
}

TEST_CASE("static multipath gives per-subcarrier gains with no interference") {
    const GridDims dims(8, 8, 15e3);
    Rng rng(21, 0, Stream::Generic);
    std::vector<PathTap> taps;
    for (int i = 0; i < 5; ++i) taps.push_back({i + 1, 0, rng.cnormal()});
    const OfdmDims ofdm = OfdmDims::for_taps(dims, taps);
    const auto H = build_H_ofdm(build_Htd(taps, ofdm), ofdm);
    const int m = dims.delay_bins;
    const int dim = dims.frame_size();
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            const cplx value = H[static_cast<size_t>(r) * static_cast<size_t>(dim) +
                                 static_cast<size_t>(c)];
            if (r == c) {
                // Circulant diagonalization: gain sum_i h_i e^{-j2pi m alpha_i / M}.
                cplx expected(0.0, 0.0);
                for (const auto& tap : taps)
                    expected += tap.gain *
                                std::polar(1.0, -kTwoPi * (r % m) * tap.delay_tap /
                                                    static_cast<double>(m));
                CHECK(std::abs(value - expected) < 1e-12);
            } else {
                CHECK(std::abs(value) < 1e-12);
            }
        }
    }
}

TEST_CASE("Doppler produces strictly positive intercarrier energy") {
    const GridDims dims(8, 8, 15e3);
    const std::vector<PathTap> taps{{1, 2, cplx(1.0, 0.0)}};
    const OfdmDims ofdm = OfdmDims::for_taps(dims, taps);
    const auto H = build_H_ofdm(build_Htd(taps, ofdm), ofdm);
    const int dim = dims.frame_size();
    double offdiag = 0.0;
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            if (r != c)
                offdiag += std::norm(H[static_cast<size_t>(r) * static_cast<size_t>(dim) +
                                       static_cast<size_t>(c)]);
    CHECK(offdiag > 0.0);
}

TEST_CASE("block construction equals the literal five-factor product") {
    const GridDims dims(8, 8, 15e3);
    Rng rng(22, 0, Stream::Generic);
    const LinkChannel link = random_profile_link(rng, dims);
    const OfdmDims ofdm = OfdmDims::for_taps(dims, link.taps);
    const TimeDelayMatrix H_td = build_Htd(link.taps, ofdm);
    CHECK(max_dev(build_H_ofdm(H_td, ofdm), build_H_ofdm_reference(H_td, ofdm)) < 1e-10);
}

TEST_CASE("the block DFT is unitary") {
    const int m = 8;
    const auto w = unitary_dft_matrix(m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            cplx acc(0.0, 0.0);
            for (int k = 0; k < m; ++k)
                acc += w[static_cast<size_t>(r) * m + static_cast<size_t>(k)] *
                       std::conj(w[static_cast<size_t>(c) * m + static_cast<size_t>(k)]);
            const cplx expected = (r == c) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            CHECK(std::abs(acc - expected) < 1e-12);
        }
    }
}

TEST_CASE("one-antenna MIMO assembly equals the link matrix") {
    const GridDims dims(4, 4, 15e3);
    Rng rng(23, 0, Stream::Generic);
    MimoChannel ch;
    ch.antennas = 1;
    ch.links.push_back({{{1, 1, rng.cnormal()}, {0, 2, rng.cnormal()}}});
    const OfdmDims ofdm = OfdmDims::for_taps(dims, ch.links[0].taps);
    CHECK(max_dev(build_H_mimo_ofdm(ch, ofdm),
                  build_H_ofdm(build_Htd(ch.links[0].taps, ofdm), ofdm)) == 0.0);
}

TEST_CASE("two-antenna flat links make every block the identity") {
    const GridDims dims(2, 4, 15e3);
    MimoChannel ch;
    ch.antennas = 2;
    ch.links.assign(4, LinkChannel{{{0, 0, cplx(1.0, 0.0)}}});
    const OfdmDims ofdm(dims, 0);
    const auto H = build_H_mimo_ofdm(ch, ofdm);
    const int dim = 2 * dims.frame_size();
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            const bool in_block = (r % dims.frame_size()) == (c % dims.frame_size());
            const cplx expected = in_block ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            CHECK(std::abs(H[static_cast<size_t>(r) * static_cast<size_t>(dim) +
                             static_cast<size_t>(c)] -
                           expected) < 1e-12);
        }
}

TEST_CASE("MIMO block placement matches per-link construction") {
    const GridDims dims(8, 8, 15e3);
    Rng rng(24, 0, Stream::Generic);
    MimoChannel ch;
    ch.antennas = 2;
    for (int i = 0; i < 4; ++i) ch.links.push_back(random_profile_link(rng, dims));
    const OfdmDims ofdm = OfdmDims::for_taps(dims, ch.links[0].taps);
    const auto H = build_H_mimo_ofdm(ch, ofdm);
    const int block = dims.frame_size();
    const int dim = 2 * block;
    for (int rx = 0; rx < 2; ++rx) {
        for (int tx = 0; tx < 2; ++tx) {
            const auto link = build_H_ofdm(build_Htd(ch.link(rx, tx).taps, ofdm), ofdm);
            for (int r = 0; r < block; ++r)
                for (int c = 0; c < block; ++c)
                    CHECK(H[static_cast<size_t>(rx * block + r) * static_cast<size_t>(dim) +
                            static_cast<size_t>(tx * block + c)] ==
                          link[static_cast<size_t>(r) * static_cast<size_t>(block) +
                               static_cast<size_t>(c)]);
        }
    }
}

TEST_CASE("sparsify with full energy keep retains every nonzero") {
    const GridDims dims(4, 4, 15e3);
    Rng rng(25, 0, Stream::Generic);
    const LinkChannel link{{{1, 1, rng.cnormal()}, {0, 2, rng.cnormal()}}};
    const OfdmDims ofdm = OfdmDims::for_taps(dims, link.taps);
    const auto dense = build_H_ofdm(build_Htd(link.taps, ofdm), ofdm);
    const SparseChannelMatrix sparse = sparsify_for_mp(dense, dims.frame_size(), 1.0);
    long dense_nonzeros = 0;
    for (const auto& v : dense) dense_nonzeros += (std::abs(v) > 0.0);
    CHECK(sparse.nonzero_count() == dense_nonzeros);
    CHECK(max_dev(sparse.to_dense(), dense) == 0.0);
}

TEST_CASE("sparsify keeps a diagonal matrix exactly at any threshold") {
    const int dim = 6;
    std::vector<cplx> dense(static_cast<size_t>(dim) * static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i)
        dense[static_cast<size_t>(i) * dim + static_cast<size_t>(i)] = cplx(i + 1.0, 0.0);
    const SparseChannelMatrix sparse = sparsify_for_mp(dense, dim, 0.5);
    CHECK(sparse.nonzero_count() == dim);
    CHECK(max_dev(sparse.to_dense(), dense) == 0.0);
}

TEST_CASE("sparsified rows keep the energy fraction with far fewer entries") {
    const GridDims dims(32, 32, 15e3);
    Rng rng(26, 0, Stream::ChannelGains);
    const auto support = taps_from_profile(ChannelProfile::default_profile(), dims);
    const MimoChannel ch = gen_random_mimo_channel(rng, support, 1);
    const OfdmDims ofdm = OfdmDims::for_taps(dims, ch.links[0].taps);
    const auto dense = build_H_ofdm(build_Htd(ch.links[0].taps, ofdm), ofdm);
    const int dim = dims.frame_size();
    const double keep = 0.999;
    const SparseChannelMatrix sparse = sparsify_for_mp(dense, dim, keep);

    double dense_energy = 0.0;
    for (const auto& v : dense) dense_energy += std::norm(v);
    double truncated = 0.0;
    const auto sparse_dense = sparse.to_dense();
    for (size_t i = 0; i < dense.size(); ++i) truncated += std::norm(dense[i] - sparse_dense[i]);
    CHECK(std::sqrt(truncated / dense_energy) <= std::sqrt(1.0 - keep) + 1e-12);

    double mean_degree = 0.0;
    for (const int c : sparse.row_counts()) mean_degree += c;
    mean_degree /= dim;
    CHECK(mean_degree < 32.0);   // far below the M=32 dense row width per block
    CHECK(mean_degree >= 1.0);
}

TEST_CASE("per-link sparsified MIMO assembly matches per-link sparsification") {
    const GridDims dims(8, 8, 15e3);
    Rng rng(27, 0, Stream::Generic);
    MimoChannel ch;
    ch.antennas = 2;
    for (int i = 0; i < 4; ++i) ch.links.push_back(random_profile_link(rng, dims));
    const OfdmDims ofdm = OfdmDims::for_taps(dims, ch.links[0].taps);
    const double keep = 0.99;
    const SparseChannelMatrix assembled = build_H_mimo_ofdm_sparse(ch, ofdm, keep);
    const int block = dims.frame_size();
    for (int rx = 0; rx < 2; ++rx) {
        for (int tx = 0; tx < 2; ++tx) {
            const auto link_sparse = sparsify_for_mp(
                build_H_ofdm(build_Htd(ch.link(rx, tx).taps, ofdm), ofdm), block, keep);
            for (int r = 0; r < block; ++r) {
                for (const auto& e : link_sparse.row(r)) {
                    const cplx* found = assembled.find(rx * block + r, tx * block + e.col);
                    REQUIRE(found != nullptr);
                    CHECK(*found == e.value);
                }
            }
        }
    }
}

TEST_CASE("static channel with one-tap equalization recovers symbols noiselessly") {
    const GridDims dims(8, 8, 15e3);
    Rng rng(28, 0, Stream::Generic);
    std::vector<PathTap> taps;
    for (int i = 0; i < 4; ++i) taps.push_back({i, 0, rng.cnormal()});
    const OfdmDims ofdm = OfdmDims::for_taps(dims, taps);
    const auto H = build_H_ofdm(build_Htd(taps, ofdm), ofdm);
    const int dim = dims.frame_size();
    const Alphabet qpsk = Alphabet::qpsk();
    std::vector<int> labels(static_cast<size_t>(dim));
    std::vector<cplx> x(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        labels[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(4));
        x[static_cast<size_t>(i)] =
            qpsk.points[static_cast<size_t>(labels[static_cast<size_t>(i)])];
    }
    // y = diag(H) x; divide by the per-subcarrier gain and slice.
    for (int i = 0; i < dim; ++i) {
        const cplx gain =
            H[static_cast<size_t>(i) * static_cast<size_t>(dim) + static_cast<size_t>(i)];
        const cplx equalized =
            (x[static_cast<size_t>(i)] * gain) / gain;
        int best = 0;
        for (int j = 1; j < 4; ++j)
            if (std::abs(equalized - qpsk.points[static_cast<size_t>(j)]) <
                std::abs(equalized - qpsk.points[static_cast<size_t>(best)]))
                best = j;
        CHECK(best == labels[static_cast<size_t>(i)]);
    }
}

TEST_SUITE_END();
