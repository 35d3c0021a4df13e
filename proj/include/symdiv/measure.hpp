#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symdiv/group.hpp"
#include "symdiv/util.hpp"

namespace symdiv {

// Atoms closer than this (Euclidean) coalesce into one; orbit expansion of an
// already-invariant measure produces duplicates up to floating-point noise.
inline constexpr double kAtomCoalesceTol = 1e-12;

// A finite weighted measure sum_i w_i * delta_{x_i} with w_i > 0 summing to 1.
// Atoms are kept in canonical lexicographic order so that two measures are
// equal as weighted atom sets iff their arrays match entrywise.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(int dim, std::vector<double> coords, std::vector<double> weights)
        : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
        if (dim_ < 1) throw std::invalid_argument("measure dimension must be >= 1");
        if (weights_.empty()) throw std::invalid_argument("measure needs at least one atom");
        if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim_))
            throw std::invalid_argument("coords/weights size mismatch");
        drop_zero_weight_atoms();
        if (weights_.empty()) throw std::invalid_argument("measure needs at least one atom");
        for (double w : weights_)
            if (!(w > 0.0)) throw std::invalid_argument("atom weights must be positive");
        canonicalize();
        double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("atom weights must sum to 1 (got " + format_g17(total) + ")");
    }

    // Uniform weights 1/m; duplicate points merge.
    static EmpiricalMeasure from_samples(int dim, std::vector<double> coords) {
        if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
        if (coords.empty() || coords.size() % static_cast<std::size_t>(dim) != 0)
            throw std::invalid_argument("empty or ragged sample list");
        std::size_t m = coords.size() / static_cast<std::size_t>(dim);
        std::vector<double> w(m, 1.0 / static_cast<double>(m));
        return EmpiricalMeasure(dim, std::move(coords), std::move(w));
    }

    static EmpiricalMeasure from_samples(const std::vector<Point>& points) {
        if (points.empty()) throw std::invalid_argument("empty sample list");
        int dim = static_cast<int>(points.front().size());
        std::vector<double> coords;
        coords.reserve(points.size() * static_cast<std::size_t>(dim));
        for (const auto& p : points) {
            if (static_cast<int>(p.size()) != dim)
                throw std::invalid_argument("inconsistent sample dimension");
            coords.insert(coords.end(), p.begin(), p.end());
        }
        return from_samples(dim, std::move(coords));
    }

    int dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& coords() const { return coords_; }
    const std::vector<double>& weights() const { return weights_; }

    double total_mass() const {
        return std::accumulate(weights_.begin(), weights_.end(), 0.0);
    }

private:
    void drop_zero_weight_atoms() {
        const auto d = static_cast<std::size_t>(dim_);
        std::size_t kept = 0;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (weights_[i] == 0.0) continue;
            if (kept != i) {
                std::copy_n(coords_.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                            coords_.begin() + static_cast<std::ptrdiff_t>(kept * d));
                weights_[kept] = weights_[i];
            }
            ++kept;
        }
        weights_.resize(kept);
        coords_.resize(kept * d);
    }

    // Sort atoms lexicographically by coordinates, then merge runs whose
    // points lie within kAtomCoalesceTol of the run head.
    void canonicalize() {
        const std::size_t m = weights_.size();
        const auto d = static_cast<std::size_t>(dim_);
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        const double* c = coords_.data();
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(c + a * d, c + a * d + d,
                                                c + b * d, c + b * d + d);
        });
        std::vector<double> nc;
        std::vector<double> nw;
        nc.reserve(coords_.size());
        nw.reserve(m);
        for (std::size_t r = 0; r < m; ++r) {
            std::size_t i = idx[r];
            std::span<const double> p(c + i * d, d);
            if (!nw.empty()) {
                std::span<const double> head(nc.data() + (nw.size() - 1) * d, d);
                if (euclidean_distance(head, p) <= kAtomCoalesceTol) {
                    nw.back() += weights_[i];
                    continue;
                }
            }
            nc.insert(nc.end(), p.begin(), p.end());
            nw.push_back(weights_[i]);
        }
        coords_ = std::move(nc);
        weights_ = std::move(nw);
    }

    int dim_;
    std::vector<double> coords_;  // row-major, size() * dim_
    std::vector<double> weights_;
};

// S^Sigma[P]: spread each atom (x, w) uniformly over its orbit, weight w/|Sigma|.
inline EmpiricalMeasure symmetrize(const EmpiricalMeasure& measure, const GroupAction& action) {
    const int k = action.order();
    if (k == 1) return measure;
    const auto d = static_cast<std::size_t>(measure.dim());
    std::vector<double> coords;
    std::vector<double> weights;
    coords.reserve(measure.coords().size() * static_cast<std::size_t>(k));
    weights.reserve(measure.size() * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < measure.size(); ++i) {
        auto p = measure.point(i);
        double w = measure.weight(i) / static_cast<double>(k);
        for (int a = 0; a < k; ++a) {
            std::size_t at = coords.size();
            coords.insert(coords.end(), p.begin(), p.end());
            action.apply_inplace(a, coords.data() + at, static_cast<int>(d));
            weights.push_back(w);
        }
    }
    return EmpiricalMeasure(measure.dim(), std::move(coords), std::move(weights));
}

// (T_0)_# P: push every atom to its orbit representative, weights unchanged.
inline EmpiricalMeasure project(const EmpiricalMeasure& measure, const GroupAction& action) {
    if (action.order() == 1) return measure;
    std::vector<double> coords = measure.coords();
    const int d = measure.dim();
    for (std::size_t i = 0; i < measure.size(); ++i)
        action.project_fundamental_inplace(coords.data() + i * static_cast<std::size_t>(d), d);
    return EmpiricalMeasure(measure.dim(), std::move(coords), measure.weights());
}

// --- CSV interchange -------------------------------------------------------
//
// One point per row, header "x1,...,xd[,weight]". Uniform-sample files omit
// the weight column. Values are written with 17 significant digits.

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}
} // namespace detail

inline EmpiricalMeasure read_measure_csv(std::istream& in, const std::string& what = "<stream>") {
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument(what + ": empty CSV (header row required)");
    auto header = detail::split_csv_line(line);
    bool has_weight = !header.empty() && header.back() == "weight";
    int dim = static_cast<int>(header.size()) - (has_weight ? 1 : 0);
    if (dim < 1) throw std::invalid_argument(what + ": no coordinate columns");
    for (int c = 0; c < dim; ++c)
        if (header[static_cast<std::size_t>(c)] != "x" + std::to_string(c + 1))
            throw std::invalid_argument(what + ": expected header column x" + std::to_string(c + 1));

    std::vector<double> coords;
    std::vector<double> weights;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument(what + ": row " + std::to_string(row) + " has wrong arity");
        try {
            for (int c = 0; c < dim; ++c) coords.push_back(std::stod(cells[static_cast<std::size_t>(c)]));
            weights.push_back(has_weight ? std::stod(cells.back()) : 1.0);
        } catch (const std::exception&) {
            throw std::invalid_argument(what + ": row " + std::to_string(row) + " is not numeric");
        }
    }
    if (weights.empty()) throw std::invalid_argument(what + ": no data rows");
    if (!has_weight) return EmpiricalMeasure::from_samples(dim, std::move(coords));
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument(what + ": nonpositive total weight");
    for (double& w : weights) w /= total; // tolerate unnormalized files
    return EmpiricalMeasure(dim, std::move(coords), std::move(weights));
}

inline EmpiricalMeasure read_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return read_measure_csv(in, path);
}

inline void write_measure_csv(std::ostream& out, const EmpiricalMeasure& m, bool with_weights = true) {
    for (int c = 0; c < m.dim(); ++c) out << (c ? "," : "") << "x" << (c + 1);
    if (with_weights) out << ",weight";
    out << "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto p = m.point(i);
        for (int c = 0; c < m.dim(); ++c)
            out << (c ? "," : "") << format_g17(p[static_cast<std::size_t>(c)]);
        if (with_weights) out << "," << format_g17(m.weight(i));
        out << "\n";
    }
}

// Raw point rows with no weight column, as produced by `symdiv sample`.
inline void write_points_csv(std::ostream& out, int dim, std::span<const double> coords) {
    for (int c = 0; c < dim; ++c) out << (c ? "," : "") << "x" << (c + 1);
    out << "\n";
    std::size_t n = coords.size() / static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < dim; ++c)
            out << (c ? "," : "")
                << format_g17(coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)]);
        out << "\n";
    }
}

} // namespace symdiv
