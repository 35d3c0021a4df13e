#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symdiv/errors.hpp"
#include "symdiv/group.hpp"
#include "symdiv/measure.hpp"
#include "symdiv/transport.hpp"
#include "symdiv/util.hpp"

namespace symdiv {

enum class W1Method { Auto, Cdf1D, TransportLP, QuotientLP };

struct W1Config {
    double lipschitz_L = 1.0;
    W1Method method = W1Method::Auto;
    double lp_tolerance = 0.0; // extra absolute reduced-cost slack; 0 = exact

    void validate() const {
        if (!(lipschitz_L > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
        if (lp_tolerance < 0.0) throw std::invalid_argument("lp_tolerance must be nonnegative");
    }
};

struct W1Diagnostics {
    std::string method;
    std::size_t p_atoms = 0, q_atoms = 0;
    std::size_t expanded_p = 0, expanded_q = 0;
    long pivots = 0;
};

// W(P, Q) = L * integral |F_P - F_Q| for measures on the line, computed
// exactly from the sorted merged atom set. Equals the Kantorovich-Rubinstein
// optimal transport cost with |x - y| ground distance.
inline double w1_1d(const EmpiricalMeasure& p, const EmpiricalMeasure& q, double lipschitz_L = 1.0) {
    if (p.dim() != 1 || q.dim() != 1)
        throw std::invalid_argument("w1_1d requires one-dimensional measures");
    if (!(lipschitz_L > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
    struct Atom {
        double pos;
        double signed_w;
    };
    std::vector<Atom> atoms;
    atoms.reserve(p.size() + q.size());
    for (std::size_t i = 0; i < p.size(); ++i) atoms.push_back({p.point(i)[0], p.weight(i)});
    for (std::size_t i = 0; i < q.size(); ++i) atoms.push_back({q.point(i)[0], -q.weight(i)});
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
    KahanSum cdf_gap;  // F_P(t) - F_Q(t), running
    KahanSum integral;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        cdf_gap.add(atoms[i].signed_w);
        integral.add(std::abs(cdf_gap.value()) * (atoms[i + 1].pos - atoms[i].pos));
    }
    return lipschitz_L * integral.value();
}

namespace detail {

inline void check_same_dim(const EmpiricalMeasure& p, const EmpiricalMeasure& q) {
    if (p.dim() != q.dim())
        throw std::invalid_argument("measures have different dimensions");
}

inline std::vector<double> euclidean_cost_matrix(const EmpiricalMeasure& p,
                                                 const EmpiricalMeasure& q,
                                                 double scale) {
    std::vector<double> cost(p.size() * q.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto pi = p.point(i);
        for (std::size_t j = 0; j < q.size(); ++j)
            cost[i * q.size() + j] = scale * euclidean_distance(pi, q.point(j));
    }
    return cost;
}

// min over sigma of ||x - sigma(y)|| for an isometric action. Rotations
// reduce to the circular distance between polar angles snapped to the
// 2*pi/order lattice.
inline std::vector<double> quotient_cost_matrix(const EmpiricalMeasure& p,
                                                const EmpiricalMeasure& q,
                                                const GroupAction& action,
                                                double scale) {
    if (action.kind() != GroupKind::CyclicRotation2D || action.order() == 1)
        return euclidean_cost_matrix(p, q, scale);
    const double sector = 2.0 * std::numbers::pi / action.order();
    std::vector<double> rp(p.size()), ap(p.size()), rq(q.size()), aq(q.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto x = p.point(i);
        rp[i] = std::hypot(x[0], x[1]);
        ap[i] = std::atan2(x[1], x[0]);
    }
    for (std::size_t j = 0; j < q.size(); ++j) {
        auto y = q.point(j);
        rq[j] = std::hypot(y[0], y[1]);
        aq[j] = std::atan2(y[1], y[0]);
    }
    std::vector<double> cost(p.size() * q.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < q.size(); ++j) {
            double dphi = ap[i] - aq[j];
            double snapped = dphi - sector * std::round(dphi / sector);
            double d2 = rp[i] * rp[i] + rq[j] * rq[j] - 2.0 * rp[i] * rq[j] * std::cos(snapped);
            cost[i * q.size() + j] = scale * std::sqrt(std::max(d2, 0.0));
        }
    }
    return cost;
}

} // namespace detail

// Exact optimal transport cost between the weighted atom sets under
// L * ||x - y||_2, solved to optimality by network simplex.
inline double w1_exact(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                       double lipschitz_L = 1.0, W1Diagnostics* diag = nullptr,
                       double lp_tolerance = 0.0) {
    detail::check_same_dim(p, q);
    if (!(lipschitz_L > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
    if (p.size() * q.size() > kTransportEntryGuard)
        throw resource_error("w1_exact: " + std::to_string(p.size()) + " x " +
                             std::to_string(q.size()) +
                             " atoms exceed the dense-solver guard; use coarser sizes or the "
                             "quotient method");
    auto cost = detail::euclidean_cost_matrix(p, q, lipschitz_L);
    auto res = solve_transport(p.weights(), q.weights(), cost, lp_tolerance);
    if (diag) {
        diag->method = "lp";
        diag->p_atoms = p.size();
        diag->q_atoms = q.size();
        diag->pivots = res.pivots;
    }
    return res.cost;
}

// Same optimum as w1_invariant for isometric actions, via an M x N transport
// problem on the un-expanded measures with the quotient metric
// d_Sigma(x, y) = min_sigma ||x - sigma(y)||_2 as ground cost.
inline double w1_quotient(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                          const GroupAction& action, double lipschitz_L = 1.0,
                          W1Diagnostics* diag = nullptr, double lp_tolerance = 0.0) {
    detail::check_same_dim(p, q);
    if (!(lipschitz_L > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
    if (!action.is_isometric())
        throw unsupported_error("w1_quotient requires an isometric action; " + action.to_string() +
                                " does not preserve Euclidean distances");
    auto cost = detail::quotient_cost_matrix(p, q, action, lipschitz_L);
    auto res = solve_transport(p.weights(), q.weights(), cost, lp_tolerance);
    if (diag) {
        diag->method = "quotient";
        diag->p_atoms = p.size();
        diag->q_atoms = q.size();
        diag->pivots = res.pivots;
    }
    return res.cost;
}

// W^Sigma(P, Q): the IPM over Sigma-invariant L-Lipschitz functions, computed
// as W(S^Sigma[P], S^Sigma[Q]). Method Auto picks the 1-d CDF form when d=1,
// the quotient shortcut when the orbit-expanded problem would overflow the
// dense-solver guard, and the orbit-expanded LP otherwise.
inline double w1_invariant(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                           const GroupAction& action, const W1Config& cfg = {},
                           W1Diagnostics* diag = nullptr) {
    cfg.validate();
    detail::check_same_dim(p, q);
    W1Method method = cfg.method;
    if (method == W1Method::Auto) {
        if (p.dim() == 1) {
            method = W1Method::Cdf1D;
        } else {
            auto expanded = static_cast<std::size_t>(action.order()) * p.size() *
                            static_cast<std::size_t>(action.order()) * q.size();
            method = (action.is_isometric() && expanded > kTransportEntryGuard)
                         ? W1Method::QuotientLP
                         : W1Method::TransportLP;
        }
    }
    switch (method) {
    case W1Method::Cdf1D: {
        if (p.dim() != 1) throw std::invalid_argument("Cdf1D method requires d=1");
        auto sp = symmetrize(p, action);
        auto sq = symmetrize(q, action);
        if (diag) {
            diag->method = "cdf1d";
            diag->p_atoms = p.size();
            diag->q_atoms = q.size();
            diag->expanded_p = sp.size();
            diag->expanded_q = sq.size();
        }
        return w1_1d(sp, sq, cfg.lipschitz_L);
    }
    case W1Method::TransportLP: {
        auto sp = symmetrize(p, action);
        auto sq = symmetrize(q, action);
        double v = w1_exact(sp, sq, cfg.lipschitz_L, diag, cfg.lp_tolerance);
        if (diag) {
            diag->p_atoms = p.size();
            diag->q_atoms = q.size();
            diag->expanded_p = sp.size();
            diag->expanded_q = sq.size();
        }
        return v;
    }
    case W1Method::QuotientLP:
        return w1_quotient(p, q, action, cfg.lipschitz_L, diag, cfg.lp_tolerance);
    case W1Method::Auto:
        break;
    }
    throw std::logic_error("unreachable");
}

} // namespace symdiv
