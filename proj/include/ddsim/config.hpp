// config.hpp - Simulation configuration and the flat key-value config file.

#pragma once

#include "ddsim/alphabet.hpp"
#include "ddsim/channel.hpp"
#include "ddsim/detector.hpp"
#include "ddsim/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace ddsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StoppingRule {
    long min_frames = 20;
    long min_bit_errors = 100;
    long max_frames = 20000;
};

struct SimConfig {
    GridDims dims{32, 32, 15e3};
    int antennas = 2;                   // equal at both ends
    Alphabet alphabet = Alphabet::bpsk();
    ChannelProfile profile = ChannelProfile::default_profile();
    DetectorParams detector;
    std::uint64_t master_seed = 1;
    StoppingRule stopping;
    double ofdm_energy_keep = 0.999;    // row-energy fraction kept in the OFDM graph

    void validate() const;
};

// Flat `key = value` text file; '#' starts a comment. Unknown keys are
// rejected. Keys: doppler_bins, delay_bins, subcarrier_spacing_hz, antennas,
// modulation, damping, max_iterations, epsilon, seed, min_frames,
// min_bit_errors, max_frames, ofdm_energy_keep, profile (path to a channel
// profile table). Missing keys keep their defaults.
SimConfig load_sim_config(const std::filesystem::path& file);

// Stable hash of every field that affects results; recorded in CSV output.
std::uint64_t config_hash(const SimConfig& config);

} // namespace ddsim
