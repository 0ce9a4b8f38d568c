// ddsim.cpp - Command line driver.
//
//   ddsim ber    BER sweep (delay-Doppler multiplexing, or --baseline ofdm)
//   ddsim chest  pilot channel-estimation error sweep
//   ddsim oracle cross-module consistency checks
//
// Exit codes: 0 success, 1 invariant failure, 2 bad configuration.

#include "ddsim/sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
    int doppler_bins = 32;
    int delay_bins = 32;
    double subcarrier_spacing_hz = 15e3;
    int antennas = 2;
    std::string modulation = "BPSK";
    std::uint64_t seed = 1;
    std::string profile_file;
    std::string config_file;
    std::string out_file;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--n", flags.doppler_bins, "Doppler bins per frame");
    cmd->add_option("--m", flags.delay_bins, "delay bins per frame");
    cmd->add_option("--spacing", flags.subcarrier_spacing_hz, "subcarrier spacing in Hz");
    cmd->add_option("--ant", flags.antennas, "antennas per side");
    cmd->add_option("--mod", flags.modulation, "modulation: bpsk, qpsk, 16qam");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--profile", flags.profile_file, "channel profile file");
    cmd->add_option("--config", flags.config_file, "config file (flags override it)");
    cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", flags.out_file, "output CSV path (default stdout)");
}

ddsim::SimConfig resolve_config(const CommonFlags& flags, const CLI::App* cmd) {
    ddsim::SimConfig config;
    if (!flags.config_file.empty()) config = ddsim::load_sim_config(flags.config_file);
    // Flags given on the command line win over the config file.
    auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
    int n = given("--n") ? flags.doppler_bins : config.dims.doppler_bins;
    int m = given("--m") ? flags.delay_bins : config.dims.delay_bins;
    double spacing =
        given("--spacing") ? flags.subcarrier_spacing_hz : config.dims.subcarrier_spacing_hz;
    config.dims = ddsim::GridDims(n, m, spacing);
    if (given("--ant")) config.antennas = flags.antennas;
    if (given("--mod")) config.alphabet = ddsim::Alphabet::from_name(flags.modulation);
    if (given("--seed")) config.master_seed = flags.seed;
    if (given("--profile")) config.profile = ddsim::ChannelProfile::load(flags.profile_file);
    return config;
}

void emit(const std::string& text, const std::string& out_file) {
    if (out_file.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw ddsim::ConfigError("cannot write output file: " + out_file);
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"link-level simulator for delay-Doppler multiplexing over "
                 "high-Doppler MIMO channels"};
    app.require_subcommand(1);

    CommonFlags ber_flags;
    std::vector<double> snr_list{6, 8, 10, 12, 14};
    long min_frames = 20, min_errors = 100, max_frames = 20000;
    std::string baseline;
    bool estimated = false;
    double pilot_boost_db = std::nan("");
    double energy_keep = 0.999;
    auto* ber = app.add_subcommand("ber", "Monte Carlo BER sweep");
    add_common(ber, ber_flags);
    ber->add_option("--snr-list", snr_list, "SNR points in dB (strictly increasing)")
        ->delimiter(',');
    ber->add_option("--frames", min_frames, "minimum frames per point");
    ber->add_option("--min-errors", min_errors, "minimum bit errors per point");
    ber->add_option("--max-frames", max_frames, "frame cap per point");
    ber->add_option("--baseline", baseline, "detection model: 'ofdm' for the OFDM baseline");
    ber->add_flag("--estimated", estimated, "detect with the pilot-estimated channel");
    ber->add_option("--pilot-boost-db", pilot_boost_db,
                    "pilot amplitude, 10*log10(A^2/Es); default 10*log10(N*M)");
    ber->add_option("--energy-keep", energy_keep,
                    "row energy fraction kept when sparsifying the OFDM matrix");

    CommonFlags chest_flags;
    std::vector<double> pilot_snrs{0, 4, 8, 12, 16, 20};
    long trials = 200;
    auto* chest = app.add_subcommand("chest", "pilot channel-estimation error sweep");
    add_common(chest, chest_flags);
    chest->add_option("--pilot-snr-list", pilot_snrs, "pilot SNR points in dB")->delimiter(',');
    chest->add_option("--trials", trials, "trials per pilot SNR point");

    std::uint64_t oracle_seed = 1;
    auto* oracle = app.add_subcommand("oracle", "cross-module consistency checks");
    oracle->add_option("--seed", oracle_seed, "seed for the randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ber->parsed()) {
            ddsim::SweepSpec spec;
            spec.config = resolve_config(ber_flags, ber);
            spec.config.stopping = {min_frames, min_errors, max_frames};
            spec.config.ofdm_energy_keep = energy_keep;
            spec.snr_db = snr_list;
            spec.threads = ber_flags.threads;
            if (!baseline.empty()) {
                if (baseline != "ofdm")
                    throw ddsim::ConfigError("unknown baseline: " + baseline);
                spec.options.waveform = ddsim::Waveform::Ofdm;
            }
            if (estimated) spec.options.csi = ddsim::Csi::Estimated;
            if (!std::isnan(pilot_boost_db)) spec.options.pilot_boost_db = pilot_boost_db;
            const auto records = ddsim::run_sweep(spec);
            emit(ddsim::ber_csv(spec, records), ber_flags.out_file);
        } else if (chest->parsed()) {
            ddsim::SimConfig config = resolve_config(chest_flags, chest);
            const auto rows =
                ddsim::run_estimation_experiment(config, pilot_snrs, trials, chest_flags.threads);
            emit(ddsim::chest_csv(config, rows), chest_flags.out_file);
        } else if (oracle->parsed()) {
            const auto report = ddsim::run_oracle_checks(oracle_seed);
            std::cout << report.to_string();
            if (!report.all_pass()) return 1;
        }
    } catch (const ddsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
