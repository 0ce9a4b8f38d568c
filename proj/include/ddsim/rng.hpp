// rng.hpp - Deterministic per-stream random number generation.
//
// Every random draw in a simulation comes from a stream keyed by
// (master seed, item index, purpose). Streams are derived by hashing the
// key into an xoshiro256** state, so Monte Carlo frames can be processed
// in any order and on any number of threads with bit-identical results.
// Gaussians use Box-Muller on our own engine; std::normal_distribution is
// not reproducible across standard library implementations.

#pragma once

#include "ddsim/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>

namespace ddsim {

enum class Stream : std::uint64_t {
    ChannelGains = 1,
    DataSymbols = 2,
    Noise = 3,
    PilotNoise = 4,
    Generic = 5,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t index, Stream purpose) {
        std::uint64_t h = master_seed;
        (void)splitmix64(h);
        h ^= 0x6a09e667f3bcc909ull + index;
        (void)splitmix64(h);
        h ^= static_cast<std::uint64_t>(purpose) * 0x3c6ef372fe94f82bull;
        for (auto& word : state_) word = splitmix64(h);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [0, bound), bound >= 1
    std::uint32_t uniform_int(std::uint32_t bound) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // standard normal
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0,1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    // circularly-symmetric complex Gaussian with E|z|^2 = 1
    cplx cnormal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1));
        return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t index, Stream purpose) {
    return Rng(master_seed, index, purpose);
}

} // namespace ddsim
