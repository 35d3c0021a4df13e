#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "symdiv/errors.hpp"
#include "symdiv/group.hpp"
#include "symdiv/measure.hpp"
#include "symdiv/util.hpp"

namespace symdiv {

// f_alpha(x) = (x^alpha - 1) / (alpha (alpha - 1)) on [0, inf), alpha > 1.
inline double f_alpha(double alpha, double x) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
    if (x < 0.0) throw std::domain_error("f_alpha is defined on x >= 0");
    return (std::pow(x, alpha) - 1.0) / (alpha * (alpha - 1.0));
}

// The convex conjugate of f_alpha restricted to [0, inf):
//   f*(y) = alpha^{-1} (alpha-1)^{alpha/(alpha-1)} y^{alpha/(alpha-1)} + 1/(alpha(alpha-1))
// for y > 0, and the constant 1/(alpha(alpha-1)) = -f_alpha(0) for y <= 0
// (the supremum sits at x = 0 there). Convex, nondecreasing, continuous,
// and f*(y) >= y everywhere, which drives the nonnegativity and the
// domination-by-W1 properties downstream.
inline double f_alpha_star(double alpha, double y) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
    double base = 1.0 / (alpha * (alpha - 1.0));
    if (y <= 0.0) return base;
    double e = alpha / (alpha - 1.0);
    return std::pow(alpha - 1.0, e) * std::pow(y, e) / alpha + base;
}

// (f*)'(y) = (alpha-1)^{1/(alpha-1)} y^{1/(alpha-1)} for y > 0, else 0.
inline double f_alpha_star_derivative(double alpha, double y) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
    if (y <= 0.0) return 0.0;
    double e = 1.0 / (alpha - 1.0);
    return std::pow(alpha - 1.0, e) * std::pow(y, e);
}

struct BoundConstants {
    double m0;      // sup-norm box: the optimizer is attained in |gamma| <= m0
    double l_prime; // Lipschitz constant of f* composed with an L-Lipschitz gamma
    double m1;      // sup-norm bound on f*(gamma)
};

// M0 = 1/(alpha-1) + L diam, M1 = f*(M0), L' = L (alpha-1)^{1/(alpha-1)} M0^{1/(alpha-1)}.
inline BoundConstants bound_constants(double alpha, double lipschitz_L, double diameter) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
    if (!(lipschitz_L > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
    if (diameter < 0.0) throw std::invalid_argument("diameter must be nonnegative");
    BoundConstants b;
    b.m0 = 1.0 / (alpha - 1.0) + lipschitz_L * diameter;
    b.l_prime = lipschitz_L * f_alpha_star_derivative(alpha, b.m0);
    b.m1 = f_alpha_star(alpha, b.m0);
    return b;
}

struct AlphaSolverOptions {
    long max_iters = 200000;
    double tolerance = 1e-7;  // sustained objective-improvement threshold
    int projection_sweeps = 80;
};

struct AlphaConfig {
    double alpha = 2.0;
    double lipschitz_L = 1.0;
    AlphaSolverOptions solver;

    void validate() const {
        if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
        if (!(lipschitz_L > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
        if (solver.max_iters < 1 || solver.projection_sweeps < 1 || !(solver.tolerance > 0.0))
            throw std::invalid_argument("bad solver options");
    }
};

struct PotentialSolution {
    std::vector<double> values;  // test function on the union support, canonical order
    double objective = 0.0;
    double feasibility_residual = 0.0;
    long iterations = 0;
    bool converged = false;
};

// Cap on the union support after symmetrization; the Lipschitz polytope has
// O(N^2) pairwise constraints.
inline constexpr std::size_t kAlphaSupportGuard = 4096;

// The finite concave program behind D_{f_alpha}^{Gamma_Sigma}(P_m || Q_n):
//
//   maximize  sum_u wp_u g_u - sum_u wq_u f*(g_u)
//   s.t.      |g_u - g_v| <= L ||u - v||   for all support pairs,
//             |g_u| <= M0.
//
// The support is the union of the symmetrized atom sets; wp/wq are the
// respective weights (zero where a side has no atom). Any feasible value
// vector extends to a globally L-Lipschitz function (McShane), and constants
// are feasible, so the shift variable of the equivalent shifted form needs no
// separate coordinate.
struct DAlphaProgram {
    int dim = 0;
    std::size_t size = 0;
    std::vector<double> coords;  // size * dim
    std::vector<double> wp, wq;
    std::vector<double> dist;  // condensed upper triangle, pair (u < v)
    double alpha = 2.0;
    double lipschitz_L = 1.0;
    double diameter = 0.0;
    double m0 = 0.0;
    // On the line the support is sorted, so the consecutive-pair constraints
    // imply every other pair by the triangle chain; the solver then sweeps
    // O(N) constraints instead of O(N^2).
    bool chain_suffices = false;

    std::size_t pair_index(std::size_t u, std::size_t v) const {
        // u < v
        return u * size - u * (u + 1) / 2 + (v - u - 1);
    }

    double objective(std::span<const double> g) const {
        KahanSum s;
        for (std::size_t u = 0; u < size; ++u) {
            if (wp[u] != 0.0) s.add(wp[u] * g[u]);
            if (wq[u] != 0.0) s.add(-wq[u] * f_alpha_star(alpha, g[u]));
        }
        return s.value();
    }

    void gradient(std::span<const double> g, std::span<double> out) const {
        for (std::size_t u = 0; u < size; ++u)
            out[u] = wp[u] - wq[u] * f_alpha_star_derivative(alpha, g[u]);
    }

    // max violation over the box and all pairwise Lipschitz constraints
    double feasibility_residual(std::span<const double> g) const {
        double r = 0.0;
        for (std::size_t u = 0; u < size; ++u) r = std::max(r, std::abs(g[u]) - m0);
        for (std::size_t u = 0; u < size; ++u)
            for (std::size_t v = u + 1; v < size; ++v)
                r = std::max(r, std::abs(g[u] - g[v]) - lipschitz_L * dist[pair_index(u, v)]);
        return std::max(r, 0.0);
    }

    // max violation over the box and consecutive pairs only (O(N))
    double chain_residual(std::span<const double> g) const {
        double r = 0.0;
        for (std::size_t u = 0; u < size; ++u) r = std::max(r, std::abs(g[u]) - m0);
        for (std::size_t u = 0; u + 1 < size; ++u)
            r = std::max(r, std::abs(g[u] - g[u + 1]) - lipschitz_L * dist[pair_index(u, u + 1)]);
        return std::max(r, 0.0);
    }
};

inline DAlphaProgram build_dalpha_program(const EmpiricalMeasure& p, const EmpiricalMeasure& q,
                                          const GroupAction& action, const AlphaConfig& cfg) {
    cfg.validate();
    if (p.dim() != q.dim()) throw std::invalid_argument("measures have different dimensions");
    EmpiricalMeasure sp = symmetrize(p, action);
    EmpiricalMeasure sq = symmetrize(q, action);

    // Merge the two supports, coalescing points within the atom tolerance and
    // keeping the canonical lexicographic order.
    const auto d = static_cast<std::size_t>(sp.dim());
    struct Entry {
        const double* pt;
        double wp, wq;
    };
    std::vector<Entry> entries;
    entries.reserve(sp.size() + sq.size());
    for (std::size_t i = 0; i < sp.size(); ++i)
        entries.push_back({sp.point(i).data(), sp.weight(i), 0.0});
    for (std::size_t i = 0; i < sq.size(); ++i)
        entries.push_back({sq.point(i).data(), 0.0, sq.weight(i)});
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        return std::lexicographical_compare(a.pt, a.pt + d, b.pt, b.pt + d);
    });

    DAlphaProgram prog;
    prog.dim = sp.dim();
    prog.alpha = cfg.alpha;
    prog.lipschitz_L = cfg.lipschitz_L;
    for (const Entry& e : entries) {
        bool merged = false;
        if (!prog.wp.empty()) {
            std::span<const double> head(prog.coords.data() + (prog.wp.size() - 1) * d, d);
            if (euclidean_distance(head, {e.pt, d}) <= kAtomCoalesceTol) {
                prog.wp.back() += e.wp;
                prog.wq.back() += e.wq;
                merged = true;
            }
        }
        if (!merged) {
            prog.coords.insert(prog.coords.end(), e.pt, e.pt + d);
            prog.wp.push_back(e.wp);
            prog.wq.push_back(e.wq);
        }
    }
    prog.size = prog.wp.size();
    if (prog.size > kAlphaSupportGuard)
        throw resource_error("alpha-divergence support has " + std::to_string(prog.size) +
                             " atoms after symmetrization; the pairwise-constraint solver is "
                             "capped at " + std::to_string(kAlphaSupportGuard));

    prog.dist.resize(prog.size * (prog.size - 1) / 2);
    for (std::size_t u = 0; u < prog.size; ++u) {
        std::span<const double> pu(prog.coords.data() + u * d, d);
        for (std::size_t v = u + 1; v < prog.size; ++v) {
            std::span<const double> pv(prog.coords.data() + v * d, d);
            double dd = euclidean_distance(pu, pv);
            prog.dist[prog.pair_index(u, v)] = dd;
            prog.diameter = std::max(prog.diameter, dd);
        }
    }
    prog.chain_suffices = prog.dim == 1;
    prog.m0 = bound_constants(cfg.alpha, cfg.lipschitz_L, prog.diameter).m0;
    return prog;
}

namespace detail {

// One cyclic pass of box clamping plus pairwise Lipschitz projections in
// lexicographic pair order; each violated pair moves both endpoints
// symmetrically onto the constraint surface. Sorted 1-d supports only need
// the consecutive pairs.
inline void lipschitz_projection_sweep(const DAlphaProgram& prog, std::span<double> g) {
    for (std::size_t u = 0; u < prog.size; ++u) g[u] = std::clamp(g[u], -prog.m0, prog.m0);
    auto project_pair = [&](std::size_t u, std::size_t v) {
        double c = prog.lipschitz_L * prog.dist[prog.pair_index(u, v)];
        double gap = g[u] - g[v];
        double excess = std::abs(gap) - c;
        if (excess > 0.0) {
            double shift = 0.5 * (gap > 0.0 ? excess : -excess);
            g[u] -= shift;
            g[v] += shift;
        }
    };
    if (prog.chain_suffices) {
        for (std::size_t u = 0; u + 1 < prog.size; ++u) project_pair(u, u + 1);
    } else {
        for (std::size_t u = 0; u < prog.size; ++u)
            for (std::size_t v = u + 1; v < prog.size; ++v) project_pair(u, v);
    }
}

} // namespace detail

// D_{f_alpha}^{Gamma_Sigma}(P || Q) by deterministic projected gradient ascent
// on the program above. Starts from the best feasible constant
// gamma = 1/(alpha-1), whose objective is exactly 0, so the returned value
// (the objective at the best feasible iterate seen) is always a certified
// nonnegative lower bound on the finite-dimensional optimum.
inline std::pair<double, PotentialSolution> dalpha_invariant(const EmpiricalMeasure& p,
                                                             const EmpiricalMeasure& q,
                                                             const GroupAction& action,
                                                             const AlphaConfig& cfg) {
    DAlphaProgram prog = build_dalpha_program(p, q, action, cfg);
    const std::size_t n = prog.size;
    const auto& opt = cfg.solver;

    std::vector<double> g(n, 1.0 / (cfg.alpha - 1.0));
    std::vector<double> grad(n);

    double wmax = 0.0;
    for (std::size_t u = 0; u < n; ++u) wmax = std::max({wmax, prog.wp[u], prog.wq[u]});
    double deriv_cap = std::max(f_alpha_star_derivative(cfg.alpha, prog.m0), 1.0);
    const double step_scale = 1.0 / (wmax * deriv_cap);

    PotentialSolution best;
    best.values = g;
    best.objective = prog.objective(g);

    const double feas_tol = 1e-7;
    // with chain-only sweeps a consecutive violation can amplify along the
    // support, so the in-loop gate divides the budget by the chain length
    const double gate = prog.chain_suffices ? feas_tol / static_cast<double>(n) : feas_tol;
    const double proj_target = std::min(1e-9, gate / 10.0);
    auto residual_of = [&](std::span<const double> v) {
        return prog.chain_suffices ? prog.chain_residual(v) : prog.feasibility_residual(v);
    };

    const int sustain_required = 25;
    int sustained = 0;
    double prev_obj = best.objective;
    long t = 0;
    for (; t < opt.max_iters; ++t) {
        prog.gradient(g, grad);
        double step = step_scale / (1.0 + static_cast<double>(t) / 100.0);
        for (std::size_t u = 0; u < n; ++u) g[u] += step * grad[u];

        double residual = residual_of(g);
        for (int sweep = 0; sweep < opt.projection_sweeps && residual > proj_target; ++sweep) {
            detail::lipschitz_projection_sweep(prog, g);
            residual = residual_of(g);
        }

        double obj = prog.objective(g);
        if (residual <= gate && obj > best.objective) {
            best.objective = obj;
            best.values = g;
        }
        if (std::abs(obj - prev_obj) < opt.tolerance && residual <= gate) {
            if (++sustained >= sustain_required) {
                ++t;
                break;
            }
        } else {
            sustained = 0;
        }
        prev_obj = obj;
    }

    best.iterations = t;
    best.converged = sustained >= sustain_required || n == 1;
    best.objective = prog.objective(best.values); // pin the reported value to the iterate
    best.feasibility_residual = prog.feasibility_residual(best.values); // exact, all pairs
    if (!best.converged && t >= opt.max_iters)
        throw solver_error("alpha-divergence solver did not meet the tolerance within " +
                               std::to_string(opt.max_iters) + " iterations",
                           best.objective, static_cast<int>(t));
    return {best.objective, std::move(best)};
}

} // namespace symdiv
