#include "ddsim/config.hpp"

#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ddsim {

void SimConfig::validate() const {
    if (antennas < 1) throw ConfigError("antennas must be >= 1");
    if (profile.paths.empty()) throw ConfigError("channel profile is empty");
    if (detector.damping <= 0.0 || detector.damping > 1.0)
        throw ConfigError("damping must be in (0, 1]");
    if (detector.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(detector.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (stopping.min_frames < 1 || stopping.max_frames < stopping.min_frames)
        throw ConfigError("frame stopping rule is inconsistent");
    if (stopping.min_bit_errors < 0) throw ConfigError("min_bit_errors must be >= 0");
    if (!(ofdm_energy_keep > 0.0) || ofdm_energy_keep > 1.0)
        throw ConfigError("ofdm_energy_keep must be in (0, 1]");
    // Resolves the profile against the grid; throws on fractional taps.
    (void)taps_from_profile(profile, dims);
}

namespace {

std::string trim(const std::string& s) {
    size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        const double parsed = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad number '" + value + "'");
    }
}

long parse_long(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        const long parsed = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
    }
}

} // namespace

SimConfig load_sim_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());

    SimConfig config;
    int n = config.dims.doppler_bins;
    int m = config.dims.delay_bins;
    double spacing = config.dims.subcarrier_spacing_hz;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");

        if (key == "doppler_bins") n = static_cast<int>(parse_long(value, key));
        else if (key == "delay_bins") m = static_cast<int>(parse_long(value, key));
        else if (key == "subcarrier_spacing_hz") spacing = parse_double(value, key);
        else if (key == "antennas") config.antennas = static_cast<int>(parse_long(value, key));
        else if (key == "modulation") {
            try {
                config.alphabet = Alphabet::from_name(value);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "damping") config.detector.damping = parse_double(value, key);
        else if (key == "max_iterations")
            config.detector.max_iterations = static_cast<int>(parse_long(value, key));
        else if (key == "epsilon") config.detector.epsilon = parse_double(value, key);
        else if (key == "seed") config.master_seed = static_cast<std::uint64_t>(parse_long(value, key));
        else if (key == "min_frames") config.stopping.min_frames = parse_long(value, key);
        else if (key == "min_bit_errors") config.stopping.min_bit_errors = parse_long(value, key);
        else if (key == "max_frames") config.stopping.max_frames = parse_long(value, key);
        else if (key == "ofdm_energy_keep") config.ofdm_energy_keep = parse_double(value, key);
        else if (key == "profile") config.profile = ChannelProfile::load(value);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    try {
        config.dims = GridDims(n, m, spacing);
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return config;
}

std::uint64_t config_hash(const SimConfig& config) {
    std::ostringstream canon;
    canon << config.dims.doppler_bins << '|' << config.dims.delay_bins << '|'
          << config.dims.subcarrier_spacing_hz << '|' << config.antennas << '|'
          << config.alphabet.name << '|' << config.detector.damping << '|'
          << config.detector.max_iterations << '|' << config.detector.epsilon << '|'
          << config.master_seed << '|' << config.stopping.min_frames << '|'
          << config.stopping.min_bit_errors << '|' << config.stopping.max_frames << '|'
          << config.ofdm_energy_keep;
    for (const auto& path : config.profile.paths) {
        canon << '|' << path.delay_s << ',' << path.doppler_hz;
        if (path.fixed_gain)
            canon << ',' << path.fixed_gain->real() << ',' << path.fixed_gain->imag();
    }
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : canon.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace ddsim
