#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "symdiv/errors.hpp"
#include "symdiv/rng.hpp"
#include "symdiv/util.hpp"

namespace symdiv {

// Largest dense cost matrix the solvers will accept.
inline constexpr std::size_t kTransportEntryGuard = 40'000'000;

struct TransportResult {
    double cost = 0.0;
    long pivots = 0;
};

// Exact solver for the balanced transportation problem
//
//   min sum_ij c_ij x_ij   s.t.  sum_j x_ij = supply_i,  sum_i x_ij = demand_j,
//                                x >= 0
//
// by primal network simplex on the dense bipartite graph.
//
// The pivot loop runs on deterministically perturbed marginals (Charnes
// perturbation, relative size 1e-9), which removes the massive primal
// degeneracy of uniform-weight instances: every pivot then strictly improves
// the objective, so no anti-cycling machinery is needed on the main path.
// Optimality of a basis depends only on the reduced costs, not on the
// marginals, so the final basis is optimal for the unperturbed problem as
// well; the returned cost re-derives the tree flows from the exact marginals.
// A pivot budget with a Bland-rule fallback remains as a safety net.
//
// `opt_tol` is an absolute reduced-cost threshold added on top of the
// relative 1e-13 * max|c| floor; 0 keeps the solve exact to that floor.
inline TransportResult solve_transport(std::span<const double> supply,
                                       std::span<const double> demand,
                                       std::span<const double> cost,
                                       double opt_tol = 0.0) {
    const auto m = static_cast<int>(supply.size());
    const auto n = static_cast<int>(demand.size());
    if (m == 0 || n == 0) throw std::invalid_argument("transport: empty marginal");
    const std::size_t arcs = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
    if (cost.size() != arcs) throw std::invalid_argument("transport: cost matrix size mismatch");
    if (arcs > kTransportEntryGuard)
        throw resource_error("transport: " + std::to_string(arcs) +
                             " cost entries exceed the dense-solver guard (" +
                             std::to_string(kTransportEntryGuard) + "); use coarser sizes");

    double sum_s = 0.0, sum_d = 0.0;
    for (double s : supply) {
        if (!(s > 0.0)) throw std::invalid_argument("transport: supplies must be positive");
        sum_s += s;
    }
    for (double d : demand) {
        if (!(d > 0.0)) throw std::invalid_argument("transport: demands must be positive");
        sum_d += d;
    }
    if (std::abs(sum_s - sum_d) > 1e-9)
        throw std::invalid_argument("transport: marginals are not balanced");

    const int nodes = m + n; // rows 0..m-1, cols m..m+n-1

    // Perturbed marginals for the pivot phase, rescaled to balance exactly.
    double min_mass = sum_s;
    for (double s : supply) min_mass = std::min(min_mass, s);
    for (double d : demand) min_mass = std::min(min_mass, d);
    // Small enough that reconstructing the exact-marginal flows on the final
    // basis keeps the cost within ~(m+n) * eps_mass * max|c| of the optimum,
    // far below the 1e-9 oracle tolerance; large enough to leave fp ties.
    const double eps_mass = 1e-11 * min_mass;
    std::vector<double> sup(supply.begin(), supply.end());
    std::vector<double> dem(demand.begin(), demand.end());
    double psum_s = 0.0, psum_d = 0.0;
    for (int i = 0; i < m; ++i) {
        sup[static_cast<std::size_t>(i)] +=
            eps_mass * static_cast<double>(splitmix64_mix(static_cast<std::uint64_t>(i) + 1) >> 11) *
            0x1.0p-53;
        psum_s += sup[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < n; ++j) {
        dem[static_cast<std::size_t>(j)] +=
            eps_mass *
            static_cast<double>(splitmix64_mix(static_cast<std::uint64_t>(m + j) + 1) >> 11) *
            0x1.0p-53;
        psum_d += dem[static_cast<std::size_t>(j)];
    }
    {
        double f = psum_s / psum_d;
        for (double& d : dem) d *= f;
    }

    std::vector<double> flow(arcs, 0.0);
    std::vector<char> basic(arcs, 0);
    std::vector<std::vector<std::pair<int, long>>> adj(static_cast<std::size_t>(nodes));

    auto arc_id = [n](int i, int j) { return static_cast<long>(i) * n + j; };
    auto arc_row = [n](long a) { return static_cast<int>(a / n); };
    auto arc_col_node = [n, m](long a) { return m + static_cast<int>(a % n); };

    auto link = [&](long a) {
        basic[static_cast<std::size_t>(a)] = 1;
        int i = arc_row(a), j = arc_col_node(a);
        adj[static_cast<std::size_t>(i)].emplace_back(j, a);
        adj[static_cast<std::size_t>(j)].emplace_back(i, a);
    };
    auto unlink = [&](long a) {
        basic[static_cast<std::size_t>(a)] = 0;
        int i = arc_row(a), j = arc_col_node(a);
        for (int node : {i, j}) {
            auto& lst = adj[static_cast<std::size_t>(node)];
            for (std::size_t t = 0; t < lst.size(); ++t) {
                if (lst[t].second == a) {
                    lst[t] = lst.back();
                    lst.pop_back();
                    break;
                }
            }
        }
    };

    // Northwest-corner initial basis: m+n-1 arcs forming a spanning tree.
    {
        int i = 0, j = 0;
        double rs = sup[0], rd = dem[0];
        while (true) {
            long a = arc_id(i, j);
            double f = std::min(rs, rd);
            flow[static_cast<std::size_t>(a)] = std::max(f, 0.0);
            link(a);
            if (i == m - 1 && j == n - 1) break;
            rs -= f;
            rd -= f;
            if ((rs <= rd || j == n - 1) && i < m - 1) {
                ++i;
                rs = sup[static_cast<std::size_t>(i)];
            } else {
                ++j;
                rd = dem[static_cast<std::size_t>(j)];
            }
        }
    }

    std::vector<double> pot(static_cast<std::size_t>(nodes), 0.0);
    std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
    std::vector<long> parent_arc(static_cast<std::size_t>(nodes), -1);
    std::vector<int> depth(static_cast<std::size_t>(nodes), 0);
    std::vector<int> stack;
    stack.reserve(static_cast<std::size_t>(nodes));

    // Rebuild parent/depth/potentials for the whole tree (root = node 0).
    // Potentials satisfy pot[row] + pot[col] = c on every basic arc.
    auto rebuild_tree = [&]() {
        std::fill(parent.begin(), parent.end(), -1);
        parent[0] = 0;
        parent_arc[0] = -1;
        depth[0] = 0;
        pot[0] = 0.0;
        stack.clear();
        stack.push_back(0);
        int seen = 1;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (auto [y, a] : adj[static_cast<std::size_t>(x)]) {
                if (parent[static_cast<std::size_t>(y)] != -1) continue;
                parent[static_cast<std::size_t>(y)] = x;
                parent_arc[static_cast<std::size_t>(y)] = a;
                depth[static_cast<std::size_t>(y)] = depth[static_cast<std::size_t>(x)] + 1;
                pot[static_cast<std::size_t>(y)] =
                    cost[static_cast<std::size_t>(a)] - pot[static_cast<std::size_t>(x)];
                stack.push_back(y);
                ++seen;
            }
        }
        if (seen != nodes) throw std::logic_error("transport: basis lost connectivity");
    };
    rebuild_tree();

    // Re-hang the subtree cut off by the leaving arc below `anchor` via the
    // entering arc, shifting its potentials by the entering reduced cost
    // (+delta on the bipartite class of `attach`, -delta on the other).
    auto rehang_subtree = [&](int attach, int anchor, long entering, double delta) {
        parent[static_cast<std::size_t>(attach)] = anchor;
        parent_arc[static_cast<std::size_t>(attach)] = entering;
        depth[static_cast<std::size_t>(attach)] = depth[static_cast<std::size_t>(anchor)] + 1;
        bool attach_is_row = attach < m;
        pot[static_cast<std::size_t>(attach)] += delta;
        stack.clear();
        stack.push_back(attach);
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (auto [y, a] : adj[static_cast<std::size_t>(x)]) {
                if (a == parent_arc[static_cast<std::size_t>(x)]) continue;
                parent[static_cast<std::size_t>(y)] = x;
                parent_arc[static_cast<std::size_t>(y)] = a;
                depth[static_cast<std::size_t>(y)] = depth[static_cast<std::size_t>(x)] + 1;
                pot[static_cast<std::size_t>(y)] += ((y < m) == attach_is_row) ? delta : -delta;
                stack.push_back(y);
            }
        }
    };

    double cost_scale = 0.0;
    for (double c : cost) cost_scale = std::max(cost_scale, std::abs(c));
    const double eps = std::max(opt_tol, 1e-13 * std::max(cost_scale, 1.0));

    const long block = std::max<long>(64, static_cast<long>(std::sqrt(static_cast<double>(arcs))));
    const long pivot_budget = 2000 + 400L * nodes;
    const long refresh_every = nodes;

    TransportResult result;
    long cursor = 0;
    bool bland = false;
    long since_refresh = 0;

    std::vector<std::pair<long, int>> cycle; // (arc, +1/-1 relative to row->col orientation)

    while (true) {
        // --- pricing ---
        long entering = -1;
        double best = -eps;
        if (!bland) {
            long scanned = 0;
            while (scanned < static_cast<long>(arcs)) {
                long stop = std::min<long>(cursor + block, static_cast<long>(arcs));
                for (long a = cursor; a < stop; ++a) {
                    if (basic[static_cast<std::size_t>(a)]) continue;
                    double r = cost[static_cast<std::size_t>(a)] -
                               pot[static_cast<std::size_t>(arc_row(a))] -
                               pot[static_cast<std::size_t>(arc_col_node(a))];
                    if (r < best) {
                        best = r;
                        entering = a;
                    }
                }
                scanned += stop - cursor;
                cursor = stop == static_cast<long>(arcs) ? 0 : stop;
                if (entering >= 0) break;
            }
        } else {
            for (long a = 0; a < static_cast<long>(arcs); ++a) {
                if (basic[static_cast<std::size_t>(a)]) continue;
                double r = cost[static_cast<std::size_t>(a)] -
                           pot[static_cast<std::size_t>(arc_row(a))] -
                           pot[static_cast<std::size_t>(arc_col_node(a))];
                if (r < -eps) {
                    entering = a;
                    break;
                }
            }
        }
        if (entering < 0) break; // optimal
        const double entering_red = cost[static_cast<std::size_t>(entering)] -
                                    pot[static_cast<std::size_t>(arc_row(entering))] -
                                    pot[static_cast<std::size_t>(arc_col_node(entering))];

        // --- cycle of the entering arc ---
        // the cycle runs u -> (entering) -> w -> ... -> lca -> ... -> u; arcs
        // on the w side are traversed child->parent, arcs on the u side
        // parent->child
        const int u = arc_row(entering);
        const int w = arc_col_node(entering);
        int lca_x = w, lca_y = u;
        while (lca_x != lca_y) {
            if (depth[static_cast<std::size_t>(lca_x)] >= depth[static_cast<std::size_t>(lca_y)])
                lca_x = parent[static_cast<std::size_t>(lca_x)];
            else
                lca_y = parent[static_cast<std::size_t>(lca_y)];
        }
        const int join = lca_x;
        cycle.clear();
        cycle.emplace_back(entering, +1);
        std::size_t w_side_arcs = 0; // contiguous block right after the entering arc
        for (int x = w; x != join; x = parent[static_cast<std::size_t>(x)]) {
            cycle.emplace_back(parent_arc[static_cast<std::size_t>(x)], (x < m) ? +1 : -1);
            ++w_side_arcs;
        }
        for (int y = u; y != join; y = parent[static_cast<std::size_t>(y)])
            cycle.emplace_back(parent_arc[static_cast<std::size_t>(y)], (y >= m) ? +1 : -1);

        // --- ratio test (ties broken toward the w side, then smallest id) ---
        double theta = 0.0;
        long leaving = -1;
        std::size_t leaving_pos = 0;
        bool first = true;
        for (std::size_t t = 1; t < cycle.size(); ++t) {
            auto [a, sign] = cycle[t];
            if (sign != -1) continue;
            double f = flow[static_cast<std::size_t>(a)];
            if (first || f < theta || (f == theta && a < leaving)) {
                theta = f;
                leaving = a;
                leaving_pos = t;
                first = false;
            }
        }
        if (leaving < 0) throw std::logic_error("transport: no leaving arc on cycle");

        if (theta != 0.0) {
            flow[static_cast<std::size_t>(entering)] += theta;
            for (std::size_t t = 1; t < cycle.size(); ++t)
                flow[static_cast<std::size_t>(cycle[t].first)] += cycle[t].second * theta;
        }
        unlink(leaving);
        link(entering);

        // the leaving arc cuts off the subtree holding the entering endpoint
        // on its side: w if the leaving arc sat on the w-side path
        ++result.pivots;
        ++since_refresh;
        if (since_refresh >= refresh_every) {
            rebuild_tree();
            since_refresh = 0;
        } else {
            bool leaving_on_w_side = leaving_pos <= w_side_arcs;
            int attach = leaving_on_w_side ? w : u;
            int anchor = leaving_on_w_side ? u : w;
            rehang_subtree(attach, anchor, entering, entering_red);
        }

        if (!bland && result.pivots > pivot_budget) {
            bland = true;
            rebuild_tree();
            since_refresh = 0;
        }
        if (result.pivots > 3 * pivot_budget)
            throw solver_error("transport: pivot budget exhausted", 0.0,
                               static_cast<int>(result.pivots));
    }

    // Flows for the *exact* marginals on the optimal basis: peel leaves
    // inward, each tree arc carries the net excess of the subtree behind it.
    {
        std::vector<int> order;
        order.reserve(static_cast<std::size_t>(nodes));
        rebuild_tree();
        std::vector<double> excess(static_cast<std::size_t>(nodes));
        for (int i = 0; i < m; ++i) excess[static_cast<std::size_t>(i)] = supply[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) excess[static_cast<std::size_t>(m + j)] = -demand[static_cast<std::size_t>(j)];
        stack.clear();
        stack.push_back(0);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (auto [yy, aa] : adj[static_cast<std::size_t>(v)])
                if (aa != parent_arc[static_cast<std::size_t>(v)]) stack.push_back(yy);
        }
        KahanSum total;
        for (std::size_t t = order.size(); t-- > 1;) {
            int v = order[t];
            long a = parent_arc[static_cast<std::size_t>(v)];
            // arc orientation is row -> col: flow equals the subtree excess
            // seen from the row side
            double f = (v < m) ? excess[static_cast<std::size_t>(v)] : -excess[static_cast<std::size_t>(v)];
            total.add(f * cost[static_cast<std::size_t>(a)]);
            excess[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])] +=
                excess[static_cast<std::size_t>(v)];
        }
        result.cost = total.value();
    }
    return result;
}

} // namespace symdiv
