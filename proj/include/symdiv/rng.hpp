#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace symdiv {

// SplitMix64 output function (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a child stream seed from a parent seed and a key. Replica j of
// experiment e uses derive_seed(derive_seed(master, e), j), so per-cell
// streams are independent of execution schedule.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    return splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL * (key + 1));
}

// Counter-based 64-bit generator: state advances by a fixed odd increment and
// the output is a bijective mix of the counter. Splitting = deriving a new
// counter start, see derive_seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64_mix(state_);
    }

    // Uniform on [0, 1) from the top 53 bits; identical on every platform.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1], safe as a log() argument.
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) via the multiply-high reduction.
    // Bias is bound/2^64, irrelevant at the sample sizes used here.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Box-Muller pair of independent standard normals. Deterministic, unlike
    // std::normal_distribution whose algorithm is implementation-defined.
    std::pair<double, double> next_gaussian_pair() {
        double u1 = next_unit_open();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    std::uint64_t state_;
};

} // namespace symdiv
