#pragma once

#include <stdexcept>
#include <string>

namespace symdiv {

// Problem too large for the dense solvers (CLI exit code 3).
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// Operation not defined for the given inputs, e.g. quotient shortcut on a
// non-isometric action.
class unsupported_error : public std::invalid_argument {
public:
    explicit unsupported_error(const std::string& what) : std::invalid_argument(what) {}
};

// Iterative solver failed to meet its tolerance contract (CLI exit code 4).
// Carries the best objective seen so that diagnostics survive the throw.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, double best_value, int iterations)
        : std::runtime_error(what), best_value(best_value), iterations(iterations) {}
    double best_value;
    int iterations;
};

} // namespace symdiv
