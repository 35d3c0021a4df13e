#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>

#include "symdiv/util.hpp"

namespace symdiv {

// Positive-definite kernel description. Only the Gaussian
// k_s(x, y) = exp(-||x - y||^2 / (2 s^2)) is implemented; K = max k = 1.
struct KernelSpec {
    enum class Kind { Gaussian };
    Kind kind = Kind::Gaussian;
    double bandwidth = 1.0;

    double max_value() const { return 1.0; }

    void validate() const {
        if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
    }

    // "gaussian:s=<bandwidth>"
    static KernelSpec parse(const std::string& text) {
        if (text.rfind("gaussian:s=", 0) != 0)
            throw std::invalid_argument("unrecognized kernel: \"" + text + "\"");
        KernelSpec spec;
        try {
            spec.bandwidth = std::stod(text.substr(11));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad kernel bandwidth in \"" + text + "\"");
        }
        spec.validate();
        return spec;
    }

    std::string to_string() const {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "gaussian:s=%g", bandwidth);
        return buf;
    }

    double eval_squared_distance(double d2) const {
        return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    }
};

inline double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                          std::span<const double> y) {
    spec.validate();
    if (x.size() != y.size())
        throw std::invalid_argument("kernel arguments have different dimensions");
    return spec.eval_squared_distance(squared_distance(x, y));
}

} // namespace symdiv
