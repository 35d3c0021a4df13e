#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symdiv/errors.hpp"
#include "symdiv/util.hpp"

namespace symdiv {

using Point = std::vector<double>;

enum class GroupKind {
    Trivial,
    CyclicRotation2D,     // rotations by 2*pi/order about the origin of R^2
    CyclicTranslationMod1 // x -> x + 1/order mod 1 on [0, 1)
};

// A finite cyclic group acting on a subset of R^d. Elements are addressed by
// index 0..order-1 with index arithmetic mod order; index 0 is the identity.
// The Haar measure is the uniform weight 1/order and is left implicit.
class GroupAction {
public:
    static GroupAction trivial() { return GroupAction(GroupKind::Trivial, 1, 0); }

    static GroupAction rotation2d(int order) {
        require_order(order);
        return GroupAction(GroupKind::CyclicRotation2D, order, 2);
    }

    static GroupAction translation_mod1(int order) {
        require_order(order);
        return GroupAction(GroupKind::CyclicTranslationMod1, order, 1);
    }

    // Serialized form used by the CLI and config files:
    //   "trivial" | "rot:<n>" | "trans1d:<n>"
    static GroupAction parse(const std::string& text) {
        if (text == "trivial") return trivial();
        auto colon = text.find(':');
        if (colon != std::string::npos) {
            std::string head = text.substr(0, colon);
            int order = parse_order(text.substr(colon + 1));
            if (head == "rot") return rotation2d(order);
            if (head == "trans1d") return translation_mod1(order);
        }
        throw std::invalid_argument("unrecognized group string: \"" + text + "\"");
    }

    std::string to_string() const {
        switch (kind_) {
        case GroupKind::Trivial: return "trivial";
        case GroupKind::CyclicRotation2D: return "rot:" + std::to_string(order_);
        case GroupKind::CyclicTranslationMod1: return "trans1d:" + std::to_string(order_);
        }
        return "?";
    }

    GroupKind kind() const { return kind_; }
    int order() const { return order_; }

    // Ambient dimension: 2 for rotations, 1 for translations, 0 (= any) for
    // the trivial group.
    int dim() const { return dim_; }

    // True when every group element preserves Euclidean distances on all of X.
    // Rotations are isometries; the mod-1 translation is not (wraparound:
    // |sigma(0.9) - sigma(0.1)| = 0.2 under a quarter shift while the original
    // gap is 0.8). An order-1 group only contains the identity.
    bool is_isometric() const {
        return kind_ != GroupKind::CyclicTranslationMod1 || order_ == 1;
    }

    // theta_sigma(x) for the element with the given index. In-place flat form;
    // this is the hot path for orbit expansion of large supports.
    void apply_inplace(int index, double* x, int d) const {
        check_index(index);
        check_point(x, d);
        if (index == 0) return; // identity, exact
        switch (kind_) {
        case GroupKind::Trivial:
            return;
        case GroupKind::CyclicRotation2D: {
            double a = 2.0 * std::numbers::pi * static_cast<double>(index) / order_;
            double c = std::cos(a), s = std::sin(a);
            double x0 = x[0], x1 = x[1];
            x[0] = c * x0 - s * x1;
            x[1] = s * x0 + c * x1;
            return;
        }
        case GroupKind::CyclicTranslationMod1: {
            double r = x[0] + static_cast<double>(index) / order_;
            if (r >= 1.0) r -= 1.0;
            x[0] = r;
            return;
        }
        }
    }

    Point apply(int index, const Point& x) const {
        Point y = x;
        apply_inplace(index, y.data(), static_cast<int>(y.size()));
        return y;
    }

    // All |Sigma| images of x in element-index order.
    std::vector<Point> orbit(const Point& x) const {
        std::vector<Point> out;
        out.reserve(static_cast<std::size_t>(order_));
        for (int a = 0; a < order_; ++a) out.push_back(apply(a, x));
        return out;
    }

    // T_0: the unique orbit representative in the fundamental domain X0
    // (sector [0, 2*pi/order) by angle for rotations, interval [0, 1/order)
    // for translations). Half-open boundaries; boundary points resolve to the
    // lower-index representative. Constant on orbits and idempotent.
    void project_fundamental_inplace(double* x, int d) const {
        check_point(x, d);
        switch (kind_) {
        case GroupKind::Trivial:
            return;
        case GroupKind::CyclicRotation2D: {
            if (order_ == 1) return;
            double r = std::hypot(x[0], x[1]);
            if (r == 0.0) return; // the origin is its own orbit
            double theta = std::atan2(x[1], x[0]);
            if (theta < 0.0) theta += 2.0 * std::numbers::pi;
            double sector = 2.0 * std::numbers::pi / order_;
            double phi = theta - sector * std::floor(theta / sector);
            if (phi >= sector) phi -= sector; // floating-point guard at the seam
            x[0] = r * std::cos(phi);
            x[1] = r * std::sin(phi);
            return;
        }
        case GroupKind::CyclicTranslationMod1: {
            double w = 1.0 / order_;
            double y = x[0] - w * std::floor(x[0] / w);
            if (y >= w) y -= w;
            x[0] = y;
            return;
        }
        }
    }

    Point project_fundamental(const Point& x) const {
        Point y = x;
        project_fundamental_inplace(y.data(), static_cast<int>(y.size()));
        return y;
    }

private:
    GroupAction(GroupKind kind, int order, int dim) : kind_(kind), order_(order), dim_(dim) {}

    static void require_order(int order) {
        if (order < 1) throw std::invalid_argument("group order must be >= 1");
    }

    static int parse_order(const std::string& s) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(s, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad group order: \"" + s + "\"");
        }
        if (pos != s.size()) throw std::invalid_argument("bad group order: \"" + s + "\"");
        require_order(v);
        return v;
    }

    void check_index(int index) const {
        if (index < 0 || index >= order_)
            throw std::invalid_argument("group element index out of range");
    }

    void check_point(const double* x, int d) const {
        if (dim_ != 0 && d != dim_)
            throw std::invalid_argument("point dimension does not match group action");
        if (kind_ == GroupKind::CyclicTranslationMod1) {
            if (!(x[0] >= 0.0 && x[0] < 1.0))
                throw std::domain_error("translation action defined on [0, 1)");
        }
    }

    GroupKind kind_;
    int order_;
    int dim_;
};

// Descriptor for the canonical fundamental domain X0 used by the grid
// builders and checkers. Any other X0 satisfying the uniqueness property
// would do equally well; this one is the sector/interval anchored at angle 0.
struct FundamentalDomain {
    GroupAction action;

    explicit FundamentalDomain(GroupAction a) : action(std::move(a)) {}

    bool contains(std::span<const double> x, double tol = 0.0) const {
        switch (action.kind()) {
        case GroupKind::Trivial:
            return true;
        case GroupKind::CyclicRotation2D: {
            if (x.size() != 2) return false;
            if (x[0] == 0.0 && x[1] == 0.0) return true;
            double theta = std::atan2(x[1], x[0]);
            if (theta < 0.0) theta += 2.0 * std::numbers::pi;
            return theta < 2.0 * std::numbers::pi / action.order() + tol;
        }
        case GroupKind::CyclicTranslationMod1:
            return x.size() == 1 && x[0] >= 0.0 && x[0] < 1.0 / action.order() + tol;
        }
        return false;
    }
};

// Sampled check of the separation / non-contraction hypotheses on X0:
//   1) ||sigma(x) - sigma'(x')|| > 2*delta0 for all x, x' and sigma != sigma'
//   2) ||sigma(x) - sigma(x')|| >= ||x - x'||
// This inspects the supplied sample points only; it can refute the hypotheses
// but never prove them.
struct CheckReport {
    bool separation_ok = false;
    double min_cross_orbit_gap = std::numeric_limits<double>::infinity();
    bool noncontraction_ok = false;
    double worst_contraction_ratio = 1.0;
};

inline CheckReport check_assumption_a1(const GroupAction& action,
                                       const std::vector<Point>& domain_samples,
                                       double delta0) {
    if (domain_samples.empty()) throw std::invalid_argument("empty sample list");
    if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
    FundamentalDomain fd(action);
    for (const auto& x : domain_samples)
        if (!fd.contains(x, 1e-12))
            throw std::domain_error("sample point outside the fundamental domain");

    const int k = action.order();
    const std::size_t n = domain_samples.size();
    std::vector<std::vector<Point>> orbits;
    orbits.reserve(n);
    for (const auto& x : domain_samples) orbits.push_back(action.orbit(x));

    CheckReport rep;
    rep.worst_contraction_ratio = std::numeric_limits<double>::infinity();
    bool any_ratio = false;
    // ||sigma_a(x) - sigma_b(x')|| over a != b equals ||x - sigma_{b-a}(x')||
    // for the cyclic actions here (rotations are isometries; the translation
    // never wraps when x, x' lie in X0), so scanning ordered pairs (i, j)
    // against the non-identity orbit elements of x_j covers the whole set.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (int d = 1; d < k; ++d) {
                double gap = euclidean_distance(domain_samples[i], orbits[j][d]);
                rep.min_cross_orbit_gap = std::min(rep.min_cross_orbit_gap, gap);
            }
            if (j <= i) continue;
            double base = euclidean_distance(domain_samples[i], domain_samples[j]);
            if (base == 0.0) continue;
            for (int a = 0; a < k; ++a) {
                double moved = euclidean_distance(orbits[i][a], orbits[j][a]);
                rep.worst_contraction_ratio = std::min(rep.worst_contraction_ratio, moved / base);
                any_ratio = true;
            }
        }
    }
    if (!any_ratio) rep.worst_contraction_ratio = 1.0;
    rep.separation_ok = rep.min_cross_orbit_gap > 2.0 * delta0;
    rep.noncontraction_ok = rep.worst_contraction_ratio >= 1.0 - 1e-9;
    return rep;
}

} // namespace symdiv
