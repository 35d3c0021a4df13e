#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "symdiv/rng.hpp"

namespace symdiv {

// The three benchmark distributions. Each sampler is a pure function of
// (spec, n, seed): same inputs give byte-identical output on every platform.

// d=1, invariant under x -> x + 1/r mod 1:
//   x_i = r^{-1} xi_i^{1/3} + eta_i,  xi uniform on [0,1),
//   eta uniform over {0, 1/r, ..., (r-1)/r}.
inline std::vector<double> sample_wss1d(int r, int n, std::uint64_t seed) {
    if (r < 1) throw std::invalid_argument("group order r must be >= 1");
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    SplitMix64 rng(seed);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) {
        double xi = rng.next_unit();
        auto k = static_cast<double>(rng.next_below(static_cast<std::uint64_t>(r)));
        x = std::cbrt(xi) / r + k / r;
        if (x >= 1.0) x = std::nextafter(1.0, 0.0); // cbrt rounding guard
    }
    return out;
}

// d=2, mixture of 8 isotropic Gaussians centered on the unit circle at
// angles 2*pi*k/8; exactly invariant under rotations by multiples of pi/4.
// The common standard deviation is a free parameter (0.05 keeps the modes
// well separated).
inline std::vector<double> sample_mog8(int n, double stddev, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    if (!(stddev > 0.0)) throw std::invalid_argument("stddev must be positive");
    SplitMix64 rng(seed);
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto k = static_cast<double>(rng.next_below(8));
        double a = 2.0 * std::numbers::pi * k / 8.0;
        auto [g0, g1] = rng.next_gaussian_pair();
        out.push_back(std::cos(a) + stddev * g0);
        out.push_back(std::sin(a) + stddev * g1);
    }
    return out;
}

// d=2, on the closed unit disk, invariant under rotation by 2*pi/l:
//   radius sqrt(xi), angle (2*pi/l) * theta^{1/3} + k * 2*pi/l,
//   xi, theta uniform on [0,1), sector index k uniform over {0,...,l-1}.
// (Offsets k * 2*pi/l are the unique choice that makes the law invariant.)
inline std::vector<double> sample_disk(int l, int n, std::uint64_t seed) {
    if (l < 1) throw std::invalid_argument("group order l must be >= 1");
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    SplitMix64 rng(seed);
    const double sector = 2.0 * std::numbers::pi / l;
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double radius = std::sqrt(rng.next_unit());
        double theta = rng.next_unit();
        auto k = static_cast<double>(rng.next_below(static_cast<std::uint64_t>(l)));
        double a = sector * std::cbrt(theta) + k * sector;
        out.push_back(radius * std::cos(a));
        out.push_back(radius * std::sin(a));
    }
    return out;
}

struct SamplerSpec {
    enum class Kind { Wss1D, MixtureOfGaussians8, Disk };
    Kind kind = Kind::Wss1D;
    int group_order = 1;   // r for wss1d, l for disk
    double stddev = 0.05;  // mog8 only

    int dim() const { return kind == Kind::Wss1D ? 1 : 2; }

    // "wss1d:r=4" | "mog8:std=0.05" | "disk:l=16"
    static SamplerSpec parse(const std::string& text) {
        auto fail = [&]() -> SamplerSpec {
            throw std::invalid_argument("unrecognized distribution: \"" + text + "\"");
        };
        auto colon = text.find(':');
        std::string head = text.substr(0, colon);
        std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
        SamplerSpec spec;
        auto int_arg = [&](const char* key) {
            std::string prefix = std::string(key) + "=";
            if (arg.rfind(prefix, 0) != 0) fail();
            std::size_t pos = 0;
            int v = 0;
            try {
                v = std::stoi(arg.substr(prefix.size()), &pos);
            } catch (const std::exception&) {
                fail();
            }
            if (pos != arg.size() - prefix.size() || v < 1)
                throw std::invalid_argument("order must be a positive integer in \"" + text + "\"");
            return v;
        };
        if (head == "wss1d") {
            spec.kind = Kind::Wss1D;
            spec.group_order = int_arg("r");
        } else if (head == "disk") {
            spec.kind = Kind::Disk;
            spec.group_order = int_arg("l");
        } else if (head == "mog8") {
            spec.kind = Kind::MixtureOfGaussians8;
            if (!arg.empty()) {
                if (arg.rfind("std=", 0) != 0) fail();
                try {
                    spec.stddev = std::stod(arg.substr(4));
                } catch (const std::exception&) {
                    fail();
                }
            }
            if (!(spec.stddev > 0.0))
                throw std::invalid_argument("mog8 std must be positive in \"" + text + "\"");
        } else {
            fail();
        }
        return spec;
    }

    std::string to_string() const {
        switch (kind) {
        case Kind::Wss1D: return "wss1d:r=" + std::to_string(group_order);
        case Kind::Disk: return "disk:l=" + std::to_string(group_order);
        case Kind::MixtureOfGaussians8: return "mog8:std=" + format_std(stddev);
        }
        return "?";
    }

    std::vector<double> draw(int n, std::uint64_t seed) const {
        switch (kind) {
        case Kind::Wss1D: return sample_wss1d(group_order, n, seed);
        case Kind::MixtureOfGaussians8: return sample_mog8(n, stddev, seed);
        case Kind::Disk: return sample_disk(group_order, n, seed);
        }
        throw std::logic_error("unreachable");
    }

private:
    static std::string format_std(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", v);
        return buf;
    }
};

} // namespace symdiv
