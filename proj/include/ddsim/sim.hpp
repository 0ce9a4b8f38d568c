// sim.hpp - Monte Carlo experiment drivers: BER sweeps for the
// delay-Doppler and OFDM signal models, pilot-estimation experiments, and
// aggregated oracle self-checks.
//
// Every frame is an independent work item whose randomness is derived from
// (master seed, frame index, purpose), and frames are processed in fixed-size
// batches with results reduced in frame order, so output is byte-identical
// for any worker count. Frame indices restart per SNR point: points share
// channel/data/noise draws (common random numbers), which smooths curves and
// pairs the perfect-CSI and estimated-CSI sweeps.
//
// SNR convention: per transmit stream, SNR = Es / sigma^2 with unit symbol
// energy and unit mean link power; sigma^2 is the total complex noise
// variance per receive element. Recorded in every CSV header.

#pragma once

#include "ddsim/chanest.hpp"
#include "ddsim/config.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddsim {

enum class Waveform { Otfs, Ofdm };
enum class Csi { Perfect, Estimated };

double noise_variance_for_snr_db(double snr_db);   // Es/SNR; 0 for infinite SNR

struct FrameOptions {
    Waveform waveform = Waveform::Otfs;
    Csi csi = Csi::Perfect;
    // Pilot amplitude as 10*log10(A^2/Es). Unset means the pilot frame
    // carries one data frame's worth of energy: 10*log10(N*M).
    std::optional<double> pilot_boost_db;
    bool fixed_channel = false;   // debug: all frames reuse channel stream 0
};

struct FrameResult {
    long bit_errors = 0;
    long bits = 0;
    int iterations = 0;
    bool converged = false;
    bool degenerate_estimate = false;
};

// Draw channel and data, build the equivalent matrix, add noise, detect,
// count bit errors against the transmitted labels.
FrameResult run_frame(const SimConfig& config, double snr_db, std::uint64_t frame_index,
                      const FrameOptions& options = {});

struct BerRecord {
    double snr_db = 0.0;
    long frames = 0;
    long bit_errors = 0;
    long total_bits = 0;
    double ber = 0.0;
    double mean_iterations = 0.0;
    std::string detector;            // "otfs-mp" or "ofdm-mp"
    std::string channel_knowledge;   // "perfect" or "estimated"
    bool reliable = false;           // reached the bit-error floor of the stopping rule
    long degenerate_estimates = 0;
};

struct SweepSpec {
    SimConfig config;
    std::vector<double> snr_db;   // nonempty, strictly increasing
    FrameOptions options;
    int threads = 0;              // 0 = hardware concurrency
};

std::vector<BerRecord> run_sweep(const SweepSpec& spec);

struct EstimationRow {
    double pilot_snr_db = 0.0;   // A^2 / sigma^2 at the pilot cell
    long trial = 0;
    double frobenius_error = 0.0;
    int false_positives = 0;
    int false_negatives = 0;
};

// One pilot frame per trial through a fresh channel draw; reports the
// Frobenius error between the true and reconstructed equivalent matrices
// plus tap-support mismatches. Trials share draws across SNR points.
std::vector<EstimationRow> run_estimation_experiment(const SimConfig& config,
                                                     std::span<const double> pilot_snrs_db,
                                                     long trials, int threads = 0);

struct OracleCheck {
    std::string name;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct OracleReport {
    std::vector<OracleCheck> checks;
    bool all_pass() const;
    std::string to_string() const;
};

// Cross-module consistency: transform round trips, sparse-matrix vs
// time-frequency oracle equivalence, message passing vs exhaustive MAP,
// and the OFDM factor-matrix identity. corrupt_hook (tests) mutates each
// assembled matrix before the equivalence comparison.
OracleReport run_oracle_checks(
    std::uint64_t seed,
    const std::function<void(SparseChannelMatrix&)>& corrupt_hook = nullptr);

// CSV emission. One comment line records the config hash, seed, and the
// SNR conventions; then a header row; then data rows.
std::string ber_csv(const SweepSpec& spec, std::span<const BerRecord> records);
std::string chest_csv(const SimConfig& config, std::span<const EstimationRow> rows);

} // namespace ddsim
