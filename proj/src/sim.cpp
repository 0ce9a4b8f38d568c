#include "ddsim/sim.hpp"

#include "ddsim/detector.hpp"
#include "ddsim/ofdm.hpp"
#include "ddsim/transforms.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ddsim {

namespace {

// Fixed batch size keeps stopping decisions independent of the worker count.
constexpr long kBatchFrames = 32;

void parallel_for(long count, int threads, const std::function<void(long)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::min<long>(std::max(threads, 1), count));
    if (threads <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (long i = w; i < count; i += threads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double default_pilot_boost_db(const GridDims& dims) {
    return 10.0 * std::log10(static_cast<double>(dims.frame_size()));
}

} // namespace

double noise_variance_for_snr_db(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

FrameResult run_frame(const SimConfig& config, double snr_db, std::uint64_t frame_index,
                      const FrameOptions& options) {
    const GridDims& dims = config.dims;
    const int n_a = config.antennas;
    const Alphabet& alphabet = config.alphabet;
    const auto support = taps_from_profile(config.profile, dims);
    const double noise_var = noise_variance_for_snr_db(snr_db);
    const double noise_std = std::sqrt(noise_var);

    const std::uint64_t channel_index = options.fixed_channel ? 0 : frame_index;
    Rng rng_channel = stream_rng(config.master_seed, channel_index, Stream::ChannelGains);
    const MimoChannel channel = gen_random_mimo_channel(rng_channel, support, n_a);

    const int symbols = n_a * dims.frame_size();
    Rng rng_data = stream_rng(config.master_seed, frame_index, Stream::DataSymbols);
    std::vector<int> tx_labels(static_cast<size_t>(symbols));
    std::vector<cplx> x(static_cast<size_t>(symbols));
    for (int i = 0; i < symbols; ++i) {
        tx_labels[static_cast<size_t>(i)] =
            static_cast<int>(rng_data.uniform_int(static_cast<std::uint32_t>(alphabet.size())));
        x[static_cast<size_t>(i)] =
            alphabet.points[static_cast<size_t>(tx_labels[static_cast<size_t>(i)])];
    }

    SparseChannelMatrix H = (options.waveform == Waveform::Otfs)
                                ? build_H_mimo(channel, dims)
                                : build_H_mimo_ofdm_sparse(
                                      channel, OfdmDims::for_taps(dims, channel.link(0, 0).taps),
                                      config.ofdm_energy_keep);

    Rng rng_noise = stream_rng(config.master_seed, frame_index, Stream::Noise);
    const std::vector<cplx> y = apply_channel(H, x, noise_std, rng_noise);

    FrameResult result;
    const SparseChannelMatrix* detection_matrix = &H;
    SparseChannelMatrix estimated(1);
    if (options.csi == Csi::Estimated) {
        if (options.waveform != Waveform::Otfs)
            throw ConfigError("estimated channel knowledge is only supported for otfs");
        const double boost_db =
            options.pilot_boost_db ? *options.pilot_boost_db : default_pilot_boost_db(dims);
        const double amplitude = std::pow(10.0, boost_db / 20.0);
        PilotPlan plan = PilotPlan::regular(dims, n_a, amplitude);
        if (!plan.covers(support))
            throw ConfigError("pilot guard regions do not cover the channel spread");
        const auto pilot_frames = make_pilot_frames(plan, dims, n_a);
        std::vector<cplx> pilot_x;
        pilot_x.reserve(static_cast<size_t>(symbols));
        for (const auto& frame : pilot_frames)
            pilot_x.insert(pilot_x.end(), frame.data().begin(), frame.data().end());
        Rng rng_pilot = stream_rng(config.master_seed, frame_index, Stream::PilotNoise);
        const std::vector<cplx> pilot_y = apply_channel(H, pilot_x, noise_std, rng_pilot);
        std::vector<DdGrid> received;
        received.reserve(static_cast<size_t>(n_a));
        for (int rx = 0; rx < n_a; ++rx)
            received.push_back(unvectorize(
                std::span<const cplx>(pilot_y).subspan(
                    static_cast<size_t>(rx) * static_cast<size_t>(dims.frame_size()),
                    static_cast<size_t>(dims.frame_size())),
                dims));
        const ChannelEstimate estimate = estimate_links(received, plan, dims);
        result.degenerate_estimate = estimate.degenerate();
        estimated = assemble_H_est(estimate, dims);
        detection_matrix = &estimated;
    }

    const MpResult detected = detect_mp(y, *detection_matrix, alphabet, config.detector, noise_var);
    result.iterations = detected.iterations;
    result.converged = detected.converged;
    result.bits = static_cast<long>(symbols) * alphabet.bits_per_symbol;
    for (int i = 0; i < symbols; ++i) {
        const unsigned diff =
            static_cast<unsigned>(tx_labels[static_cast<size_t>(i)]) ^
            static_cast<unsigned>(detected.symbols[static_cast<size_t>(i)]);
        result.bit_errors += std::popcount(diff);
    }
    return result;
}

std::vector<BerRecord> run_sweep(const SweepSpec& spec) {
    spec.config.validate();
    if (spec.snr_db.empty()) throw ConfigError("SNR list is empty");
    for (size_t i = 1; i < spec.snr_db.size(); ++i)
        if (!(spec.snr_db[i] > spec.snr_db[i - 1]))
            throw ConfigError("SNR list must be strictly increasing");

    const StoppingRule& stop = spec.config.stopping;
    std::vector<BerRecord> records;
    records.reserve(spec.snr_db.size());
    for (const double snr_db : spec.snr_db) {
        long frames = 0, errors = 0, bits = 0, degenerate = 0;
        long iteration_sum = 0;
        std::vector<FrameResult> batch(static_cast<size_t>(kBatchFrames));
        while (frames < stop.max_frames) {
            const long count = std::min(kBatchFrames, stop.max_frames - frames);
            parallel_for(count, spec.threads, [&](long i) {
                batch[static_cast<size_t>(i)] =
                    run_frame(spec.config, snr_db, static_cast<std::uint64_t>(frames + i),
                              spec.options);
            });
            for (long i = 0; i < count; ++i) {
                const FrameResult& r = batch[static_cast<size_t>(i)];
                errors += r.bit_errors;
                bits += r.bits;
                iteration_sum += r.iterations;
                if (r.degenerate_estimate) ++degenerate;
            }
            frames += count;
            if (frames >= stop.min_frames && errors >= stop.min_bit_errors) break;
        }

        BerRecord record;
        record.snr_db = snr_db;
        record.frames = frames;
        record.bit_errors = errors;
        record.total_bits = bits;
        record.ber = bits > 0 ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
        record.mean_iterations =
            frames > 0 ? static_cast<double>(iteration_sum) / static_cast<double>(frames) : 0.0;
        record.detector = spec.options.waveform == Waveform::Otfs ? "otfs-mp" : "ofdm-mp";
        record.channel_knowledge =
            spec.options.csi == Csi::Perfect ? "perfect" : "estimated";
        record.reliable = errors >= stop.min_bit_errors;
        record.degenerate_estimates = degenerate;
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<EstimationRow> run_estimation_experiment(const SimConfig& config,
                                                     std::span<const double> pilot_snrs_db,
                                                     long trials, int threads) {
    config.validate();
    if (pilot_snrs_db.empty()) throw ConfigError("pilot SNR list is empty");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    const GridDims& dims = config.dims;
    const int n_a = config.antennas;
    const auto support = taps_from_profile(config.profile, dims);

    PilotPlan plan = PilotPlan::regular(dims, n_a, 1.0);
    if (!plan.covers(support))
        throw ConfigError("pilot guard regions do not cover the channel spread");
    const auto pilot_frames = make_pilot_frames(plan, dims, n_a);
    std::vector<cplx> pilot_x;
    for (const auto& frame : pilot_frames)
        pilot_x.insert(pilot_x.end(), frame.data().begin(), frame.data().end());

    std::vector<EstimationRow> rows(pilot_snrs_db.size() * static_cast<size_t>(trials));
    for (size_t s = 0; s < pilot_snrs_db.size(); ++s) {
        const double pilot_snr_db = pilot_snrs_db[s];
        // A = 1, so sigma comes straight from the pilot SNR definition.
        const double noise_std = std::sqrt(noise_variance_for_snr_db(pilot_snr_db));
        parallel_for(trials, threads, [&](long t) {
            Rng rng_channel =
                stream_rng(config.master_seed, static_cast<std::uint64_t>(t), Stream::ChannelGains);
            const MimoChannel channel = gen_random_mimo_channel(rng_channel, support, n_a);
            const SparseChannelMatrix H = build_H_mimo(channel, dims);
            Rng rng_noise =
                stream_rng(config.master_seed, static_cast<std::uint64_t>(t), Stream::PilotNoise);
            const std::vector<cplx> y = apply_channel(H, pilot_x, noise_std, rng_noise);
            std::vector<DdGrid> received;
            received.reserve(static_cast<size_t>(n_a));
            for (int rx = 0; rx < n_a; ++rx)
                received.push_back(unvectorize(
                    std::span<const cplx>(y).subspan(
                        static_cast<size_t>(rx) * static_cast<size_t>(dims.frame_size()),
                        static_cast<size_t>(dims.frame_size())),
                    dims));
            const ChannelEstimate estimate = estimate_links(received, plan, dims);
            const SparseChannelMatrix H_est = assemble_H_est(estimate, dims);
            const SupportErrors support_errors = count_support_errors(estimate, channel);
            EstimationRow row;
            row.pilot_snr_db = pilot_snr_db;
            row.trial = t;
            row.frobenius_error = frobenius_error(H, H_est);
            row.false_positives = support_errors.false_positives;
            row.false_negatives = support_errors.false_negatives;
            rows[s * static_cast<size_t>(trials) + static_cast<size_t>(t)] = row;
        });
    }
    return rows;
}

bool OracleReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const OracleCheck& c) { return c.pass; });
}

std::string OracleReport::to_string() const {
    std::ostringstream out;
    for (const auto& check : checks) {
        out << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
            << "  max_deviation=" << fmt(check.max_deviation)
            << " tolerance=" << fmt(check.tolerance) << "\n";
    }
    return out.str();
}

OracleReport run_oracle_checks(std::uint64_t seed,
                               const std::function<void(SparseChannelMatrix&)>& corrupt_hook) {
    OracleReport report;
    Rng rng(seed, 0, Stream::Generic);

    // Transform round trips on random grids.
    {
        double dev = 0.0;
        for (const int size : {2, 4, 8, 16, 32}) {
            const GridDims dims(size, size, 15e3);
            DdGrid x(dims);
            for (auto& v : x.data()) v = rng.cnormal();
            const DdGrid back = sfft(isfft(x));
            for (int i = 0; i < dims.frame_size(); ++i)
                dev = std::max(dev, std::abs(back.data()[static_cast<size_t>(i)] -
                                             x.data()[static_cast<size_t>(i)]));
            TfGrid X(dims);
            for (auto& v : X.data()) v = rng.cnormal();
            const TfGrid X_back = isfft(sfft(X));
            const TfGrid X_wh = wigner_rect(heisenberg_rect(X));
            for (int i = 0; i < dims.frame_size(); ++i) {
                dev = std::max(dev, std::abs(X_back.data()[static_cast<size_t>(i)] -
                                             X.data()[static_cast<size_t>(i)]));
                dev = std::max(dev, std::abs(X_wh.data()[static_cast<size_t>(i)] -
                                             X.data()[static_cast<size_t>(i)]));
            }
        }
        report.checks.push_back({"transform round trips", dev, 1e-12, dev < 1e-12});
    }

    // Sparse equivalent matrix vs multiplicative time-frequency oracle.
    {
        double dev = 0.0;
        for (const int size : {2, 4, 8, 16}) {
            const GridDims dims(size, size, 15e3);
            for (int trial = 0; trial < 25; ++trial) {
                const int paths = 1 + static_cast<int>(rng.uniform_int(
                                          static_cast<std::uint32_t>(std::min(size * size, 6))));
                LinkChannel link;
                while (static_cast<int>(link.taps.size()) < paths) {
                    const int alpha = static_cast<int>(
                        rng.uniform_int(static_cast<std::uint32_t>(size)));
                    const int beta = static_cast<int>(
                        rng.uniform_int(static_cast<std::uint32_t>(size)));
                    const bool duplicate =
                        std::any_of(link.taps.begin(), link.taps.end(), [&](const PathTap& t) {
                            return t.delay_tap == alpha && t.doppler_tap == beta;
                        });
                    if (!duplicate)
                        link.taps.push_back(
                            {alpha, beta, rng.cnormal() / std::sqrt(static_cast<double>(paths))});
                }
                SparseChannelMatrix H = build_H_link(link, dims);
                if (corrupt_hook) corrupt_hook(H);
                DdGrid x(dims);
                for (auto& v : x.data()) v = rng.cnormal();
                const DdGrid via_oracle = oracle_apply(x, link.taps);
                const std::vector<cplx> via_matrix = H.apply(vectorize(x));
                for (int i = 0; i < dims.frame_size(); ++i)
                    dev = std::max(dev, std::abs(via_oracle.data()[static_cast<size_t>(i)] -
                                                 via_matrix[static_cast<size_t>(i)]));
            }
        }
        report.checks.push_back({"equivalent matrix vs tf oracle", dev, 1e-9, dev < 1e-9});
    }

    // Message passing vs exhaustive MAP on small instances at 20 dB.
    {
        const GridDims dims(2, 2, 15e3);
        const Alphabet alphabet = Alphabet::bpsk();
        const DetectorParams params;
        const double noise_var = noise_variance_for_snr_db(20.0);
        const double noise_std = std::sqrt(noise_var);
        long agree = 0, total = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const int paths = 1 + static_cast<int>(rng.uniform_int(2));
            LinkChannel link;
            while (static_cast<int>(link.taps.size()) < paths) {
                const int alpha = static_cast<int>(rng.uniform_int(2));
                const int beta = static_cast<int>(rng.uniform_int(2));
                const bool duplicate =
                    std::any_of(link.taps.begin(), link.taps.end(), [&](const PathTap& t) {
                        return t.delay_tap == alpha && t.doppler_tap == beta;
                    });
                if (!duplicate)
                    link.taps.push_back(
                        {alpha, beta, rng.cnormal() / std::sqrt(static_cast<double>(paths))});
            }
            const SparseChannelMatrix H = build_H_link(link, dims);
            std::vector<cplx> x(4);
            std::vector<int> labels(4);
            for (int i = 0; i < 4; ++i) {
                labels[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(2));
                x[static_cast<size_t>(i)] =
                    alphabet.points[static_cast<size_t>(labels[static_cast<size_t>(i)])];
            }
            std::vector<cplx> y = H.apply(x);
            for (auto& v : y) v += noise_std * rng.cnormal();
            const MpResult mp = detect_mp(y, H, alphabet, params, noise_var);
            const std::vector<int> map = detect_map_bruteforce(y, H, alphabet);
            for (int i = 0; i < 4; ++i) {
                agree += (mp.symbols[static_cast<size_t>(i)] == map[static_cast<size_t>(i)]);
                ++total;
            }
        }
        const double disagreement =
            1.0 - static_cast<double>(agree) / static_cast<double>(total);
        report.checks.push_back(
            {"mp vs exhaustive map disagreement", disagreement, 0.01, disagreement < 0.01});
    }

    // OFDM fast per-block construction vs the literal factor product.
    {
        const GridDims dims(8, 8, 15e3);
        double dev = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            LinkChannel link;
            for (int i = 0; i < 5 && static_cast<int>(link.taps.size()) < 5;) {
                const int alpha = static_cast<int>(rng.uniform_int(6));
                const int beta = static_cast<int>(rng.uniform_int(8));
                const bool duplicate =
                    std::any_of(link.taps.begin(), link.taps.end(), [&](const PathTap& t) {
                        return t.delay_tap == alpha && t.doppler_tap == beta;
                    });
                if (!duplicate) {
                    link.taps.push_back({alpha, beta, rng.cnormal() / std::sqrt(5.0)});
                    ++i;
                }
            }
            const OfdmDims ofdm_dims = OfdmDims::for_taps(dims, link.taps);
            const TimeDelayMatrix H_td = build_Htd(link.taps, ofdm_dims);
            const auto fast = build_H_ofdm(H_td, ofdm_dims);
            const auto reference = build_H_ofdm_reference(H_td, ofdm_dims);
            for (size_t i = 0; i < fast.size(); ++i)
                dev = std::max(dev, std::abs(fast[i] - reference[i]));
        }
        report.checks.push_back({"ofdm factor-matrix identity", dev, 1e-10, dev < 1e-10});
    }

    return report;
}

namespace {

std::string csv_prelude(const char* tool, const SimConfig& config) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "# tool=%s config_hash=%016" PRIx64 " seed=%" PRIu64
                  " snr=Es/sigma2 per tx stream (Es=1, sigma2=total complex noise"
                  " variance per rx element) pilot_snr=A^2/sigma2\n",
                  tool, config_hash(config), config.master_seed);
    return buf;
}

} // namespace

std::string ber_csv(const SweepSpec& spec, std::span<const BerRecord> records) {
    std::ostringstream out;
    out << csv_prelude("ber", spec.config);
    out << "snr_db,detector,channel_knowledge,frames,total_bits,bit_errors,ber,"
           "mean_iterations,reliable,degenerate_estimates\n";
    for (const auto& r : records) {
        out << fmt(r.snr_db) << ',' << r.detector << ',' << r.channel_knowledge << ','
            << r.frames << ',' << r.total_bits << ',' << r.bit_errors << ',' << fmt(r.ber)
            << ',' << fmt(r.mean_iterations) << ',' << (r.reliable ? 1 : 0) << ','
            << r.degenerate_estimates << '\n';
    }
    return out.str();
}

std::string chest_csv(const SimConfig& config, std::span<const EstimationRow> rows) {
    std::ostringstream out;
    out << csv_prelude("chest", config);
    out << "pilot_snr_db,trial,frobenius_error,false_pos,false_neg\n";
    for (const auto& r : rows) {
        out << fmt(r.pilot_snr_db) << ',' << r.trial << ',' << fmt(r.frobenius_error) << ','
            << r.false_positives << ',' << r.false_negatives << '\n';
    }
    return out.str();
}

} // namespace ddsim
