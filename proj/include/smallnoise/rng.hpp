#pragma once

#include <cmath>
#include <cstdint>

// Self-contained generators so that a (seed -> path) mapping is identical
// across platforms and standard-library versions. std::normal_distribution
// is implementation-defined and would break bit-level reproducibility.

namespace smallnoise {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based replicate seed: depends only on (master_seed, index), so
// ensembles can be generated in any order or in parallel.
inline std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t replicate_index) {
    std::uint64_t s = master_seed ^ (0x9E3779B97F4A7C15ULL * (replicate_index + 1));
    return splitmix64(s);
}

// Derives a sub-stream seed for a named stage of an experiment (one per
// epsilon grid point, calibration pass, ...).
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t s = master_seed + 0xD1B54A32D192ED03ULL * (stream_index + 1);
    std::uint64_t a = splitmix64(s);
    return splitmix64(s) ^ (a << 1);
}

// xoshiro256++ with Box-Muller normals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0, 1]; never zero so log() below is safe.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the pair partner is cached.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace smallnoise
