#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "symdiv/errors.hpp"
#include "symdiv/falpha.hpp"
#include "symdiv/group.hpp"
#include "symdiv/kernel.hpp"
#include "symdiv/measure.hpp"
#include "symdiv/mmd.hpp"
#include "symdiv/rng.hpp"
#include "symdiv/samplers.hpp"
#include "symdiv/util.hpp"
#include "symdiv/w1.hpp"

namespace symdiv {

// Replicated two-sample experiments: for each (group order, sample size,
// replica) draw two independent samples from the same Sigma-invariant
// benchmark distribution and record the Sigma-aware estimate. The true
// divergence is zero throughout, so the recorded value is the estimation
// error itself.
enum class PlanKind { Wss1D, Wss2D, MmdDiskFixedS, MmdDiskAdaptiveS, FAlpha1D };

struct ExperimentPlan {
    PlanKind kind = PlanKind::Wss1D;
    std::string name = "wss1d";
    std::vector<int> group_orders{1, 4, 16, 64, 256};
    std::vector<int> sizes{64, 128, 256, 512, 1024, 2048, 4096, 8192};
    int replicas = 10;
    std::uint64_t master_seed = 12345;
    double lipschitz_L = 1.0;
    double mog_std = 0.05;     // Wss2D
    double alpha = 2.0;        // FAlpha1D
    int fixed_s_order = 16;    // MmdDiskFixedS: bandwidth s = 2*pi/(6*l)
    int jobs = 0;              // 0: SYMDIV_JOBS env var, then hardware

    void validate() const {
        if (group_orders.empty() || sizes.empty()) throw std::invalid_argument("empty plan axes");
        if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
        for (std::size_t i = 1; i < sizes.size(); ++i)
            if (sizes[i] <= sizes[i - 1])
                throw std::invalid_argument("sizes must be strictly increasing");
        for (int o : group_orders)
            if (o < 1) throw std::invalid_argument("group orders must be >= 1");
        for (int n : sizes)
            if (n < 1) throw std::invalid_argument("sizes must be >= 1");
        if (kind == PlanKind::MmdDiskFixedS && fixed_s_order < 1)
            throw std::invalid_argument("fixed_s_order must be >= 1");
        if (kind == PlanKind::FAlpha1D && !(alpha > 1.0))
            throw std::invalid_argument("alpha must be > 1");
    }
};

inline ExperimentPlan default_plan(PlanKind kind) {
    ExperimentPlan plan;
    plan.kind = kind;
    switch (kind) {
    case PlanKind::Wss1D:
        plan.name = "wss1d";
        break;
    case PlanKind::Wss2D:
        plan.name = "wss2d";
        plan.group_orders = {1, 2, 4};
        plan.sizes = {64, 128, 256, 512, 1024, 2048};
        break;
    case PlanKind::MmdDiskFixedS:
        plan.name = "mmd-disk-fixed";
        break;
    case PlanKind::MmdDiskAdaptiveS:
        plan.name = "mmd-disk-adaptive";
        break;
    case PlanKind::FAlpha1D:
        plan.name = "falpha1d";
        plan.group_orders = {1, 4};
        plan.sizes = {32, 64, 128, 256};
        break;
    }
    return plan;
}

inline ExperimentPlan plan_by_name(const std::string& name) {
    if (name == "wss1d") return default_plan(PlanKind::Wss1D);
    if (name == "wss2d") return default_plan(PlanKind::Wss2D);
    if (name == "mmd-disk-fixed") return default_plan(PlanKind::MmdDiskFixedS);
    if (name == "mmd-disk-adaptive") return default_plan(PlanKind::MmdDiskAdaptiveS);
    if (name == "falpha1d") return default_plan(PlanKind::FAlpha1D);
    throw std::invalid_argument("unknown experiment name: \"" + name + "\" (expected wss1d, "
                                "wss2d, mmd-disk-fixed, mmd-disk-adaptive, or falpha1d)");
}

struct ResultRow {
    std::string experiment;
    int group_order = 0;
    int n = 0;
    int replica = 0;
    std::uint64_t seed = 0;
    double value = 0.0;
};

struct AggregateRow {
    std::string experiment;
    int group_order = 0;
    int n = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;

    // mean over replicas for one (order, n)
    double mean_value(int group_order, int n) const {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : rows)
            if (r.group_order == group_order && r.n == n) {
                sum += r.value;
                ++count;
            }
        if (count == 0) throw std::invalid_argument("no rows for the requested cell");
        return sum / count;
    }

    std::vector<int> sizes_present(int group_order) const {
        std::vector<int> out;
        for (const auto& r : rows)
            if (r.group_order == group_order &&
                std::find(out.begin(), out.end(), r.n) == out.end())
                out.push_back(r.n);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool has_order(int group_order) const {
        for (const auto& r : rows)
            if (r.group_order == group_order) return true;
        return false;
    }

    std::vector<AggregateRow> aggregate() const {
        std::map<std::pair<int, int>, std::vector<double>> cells;
        std::string experiment = rows.empty() ? std::string() : rows.front().experiment;
        for (const auto& r : rows) cells[{r.group_order, r.n}].push_back(r.value);
        std::vector<AggregateRow> out;
        out.reserve(cells.size());
        for (const auto& [key, values] : cells) {
            AggregateRow a;
            a.experiment = experiment;
            a.group_order = key.first;
            a.n = key.second;
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            a.mean = mean;
            if (values.size() > 1) {
                double ss = 0.0;
                for (double v : values) ss += (v - mean) * (v - mean);
                a.stderr_ = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0) /
                                      static_cast<double>(values.size()));
            }
            out.push_back(a);
        }
        return out;
    }
};

// Pointwise mean_a(n) / mean_b(n) at every sample size present for both orders.
inline std::vector<std::pair<int, double>> ratio_curves(const ResultTable& table, int order_a,
                                                        int order_b) {
    if (!table.has_order(order_a) || !table.has_order(order_b))
        throw std::invalid_argument("ratio_curves: order missing from table");
    auto na = table.sizes_present(order_a);
    auto nb = table.sizes_present(order_b);
    std::vector<std::pair<int, double>> out;
    for (int n : na) {
        if (std::find(nb.begin(), nb.end(), n) == nb.end()) continue;
        out.emplace_back(n, table.mean_value(order_a, n) / table.mean_value(order_b, n));
    }
    return out;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Least-squares slope of log(mean value) against log(n), over sizes with a
// strictly positive mean.
inline RateFit fit_rate(const ResultTable& table, int group_order) {
    if (!table.has_order(group_order))
        throw std::invalid_argument("fit_rate: order missing from table");
    std::vector<double> xs, ys;
    for (int n : table.sizes_present(group_order)) {
        double mean = table.mean_value(group_order, n);
        if (mean > 0.0) {
            xs.push_back(std::log(static_cast<double>(n)));
            ys.push_back(std::log(mean));
        }
    }
    if (table.sizes_present(group_order).size() < 3)
        throw std::invalid_argument("fit_rate needs at least 3 sizes");
    if (xs.size() < 3)
        throw std::runtime_error("fit_rate: degenerate table (mean values not positive)");
    double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    RateFit fit;
    double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ybar = sy / n;
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double pred = fit.intercept + fit.slope * xs[i];
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
        ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace detail {

inline int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SYMDIV_JOBS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::uint64_t plan_tag(PlanKind kind) {
    switch (kind) {
    case PlanKind::Wss1D: return 1;
    case PlanKind::Wss2D: return 2;
    case PlanKind::MmdDiskFixedS: return 3;
    case PlanKind::MmdDiskAdaptiveS: return 4;
    case PlanKind::FAlpha1D: return 5;
    }
    return 0;
}

struct Cell {
    int group_order;
    int n;
    int replica;
    std::uint64_t seed; // replica stream seed; the two sample draws derive side 0 / 1
};

inline double run_cell(const ExperimentPlan& plan, const Cell& cell) {
    std::uint64_t seed_p = derive_seed(cell.seed, 0);
    std::uint64_t seed_q = derive_seed(cell.seed, 1);
    switch (plan.kind) {
    case PlanKind::Wss1D: {
        auto action = GroupAction::translation_mod1(cell.group_order);
        auto p = EmpiricalMeasure::from_samples(1, sample_wss1d(cell.group_order, cell.n, seed_p));
        auto q = EmpiricalMeasure::from_samples(1, sample_wss1d(cell.group_order, cell.n, seed_q));
        W1Config cfg;
        cfg.lipschitz_L = plan.lipschitz_L;
        return w1_invariant(p, q, action, cfg);
    }
    case PlanKind::Wss2D: {
        auto action = GroupAction::rotation2d(cell.group_order);
        auto p = EmpiricalMeasure::from_samples(2, sample_mog8(cell.n, plan.mog_std, seed_p));
        auto q = EmpiricalMeasure::from_samples(2, sample_mog8(cell.n, plan.mog_std, seed_q));
        W1Config cfg;
        cfg.lipschitz_L = plan.lipschitz_L;
        return w1_invariant(p, q, action, cfg);
    }
    case PlanKind::MmdDiskFixedS:
    case PlanKind::MmdDiskAdaptiveS: {
        auto action = GroupAction::rotation2d(cell.group_order);
        auto p = EmpiricalMeasure::from_samples(2, sample_disk(cell.group_order, cell.n, seed_p));
        auto q = EmpiricalMeasure::from_samples(2, sample_disk(cell.group_order, cell.n, seed_q));
        KernelSpec kernel;
        int l = plan.kind == PlanKind::MmdDiskFixedS ? plan.fixed_s_order : cell.group_order;
        kernel.bandwidth = 2.0 * std::numbers::pi / (6.0 * l);
        // orbit expansion would square the Gram cost at these sizes
        auto path = cell.group_order == 1 ? MmdPath::OrbitExpansion : MmdPath::SymmetrizedKernel;
        return mmd_invariant(p, q, action, kernel, path);
    }
    case PlanKind::FAlpha1D: {
        auto action = GroupAction::translation_mod1(cell.group_order);
        auto p = EmpiricalMeasure::from_samples(1, sample_wss1d(cell.group_order, cell.n, seed_p));
        auto q = EmpiricalMeasure::from_samples(1, sample_wss1d(cell.group_order, cell.n, seed_q));
        AlphaConfig cfg;
        cfg.alpha = plan.alpha;
        cfg.lipschitz_L = plan.lipschitz_L;
        return dalpha_invariant(p, q, action, cfg).first;
    }
    }
    throw std::logic_error("unreachable");
}

} // namespace detail

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Execute every (group_order, n, replica) cell of the plan. Cells run on a
// small thread pool; per-cell seeds derive from the plan key alone and the
// rows come back sorted by cell, so the table is identical for any job count.
inline ResultTable run(const ExperimentPlan& plan, const ProgressFn& progress = {}) {
    plan.validate();
    // Replica j uses the stream derive(derive(master, experiment), j): every
    // (order, n) cell of one replica sees the same underlying draws. The
    // counter-based generator makes this schedule-independent, and the common
    // random numbers across group orders are what keeps the ratio curves flat.
    std::vector<detail::Cell> cells;
    std::uint64_t tag = derive_seed(plan.master_seed, detail::plan_tag(plan.kind));
    for (int order : plan.group_orders)
        for (int n : plan.sizes)
            for (int replica = 0; replica < plan.replicas; ++replica)
                cells.push_back({order, n, replica,
                                 derive_seed(tag, static_cast<std::uint64_t>(replica))});

    std::vector<double> values(cells.size(), 0.0);
    std::vector<char> done(cells.size(), 0);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> completed{0};
    std::mutex fail_mutex;
    std::exception_ptr failure;

    int jobs = std::min<int>(detail::resolve_jobs(plan.jobs), static_cast<int>(cells.size()));
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            {
                std::lock_guard<std::mutex> lk(fail_mutex);
                if (failure) return;
            }
            try {
                values[i] = detail::run_cell(plan, cells[i]);
                done[i] = 1;
                std::size_t c = completed.fetch_add(1) + 1;
                if (progress) progress(c, cells.size());
            } catch (...) {
                std::lock_guard<std::mutex> lk(fail_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const resource_error& e) {
            std::string msg = std::string(e.what()) + "; completed cells:";
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (done[i])
                    msg += " (" + std::to_string(cells[i].group_order) + "," +
                           std::to_string(cells[i].n) + "," + std::to_string(cells[i].replica) + ")";
            throw resource_error(msg);
        }
    }

    ResultTable table;
    table.rows.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        table.rows.push_back({plan.name, cells[i].group_order, cells[i].n, cells[i].replica,
                              cells[i].seed, values[i]});
    return table;
}

// --- CSV output -------------------------------------------------------------
//
// Raw:       experiment,group_order,n,replica,seed,value
// Aggregate: experiment,group_order,n,mean,stderr
// Ratio:     experiment,order_a,order_b,n,ratio
// Floats use 17 significant digits. Files are written to a temp path and
// renamed into place so a failure never leaves a partial CSV.

namespace detail {
inline void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out.flush()) throw std::runtime_error("failed writing " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}
} // namespace detail

inline void write_raw_csv(const std::string& path, const ResultTable& table) {
    std::ostringstream out;
    out << "experiment,group_order,n,replica,seed,value\n";
    for (const auto& r : table.rows)
        out << r.experiment << ',' << r.group_order << ',' << r.n << ',' << r.replica << ','
            << r.seed << ',' << format_g17(r.value) << '\n';
    detail::atomic_write(path, out.str());
}

inline void write_aggregate_csv(const std::string& path, const ResultTable& table) {
    std::ostringstream out;
    out << "experiment,group_order,n,mean,stderr\n";
    for (const auto& a : table.aggregate())
        out << a.experiment << ',' << a.group_order << ',' << a.n << ','
            << format_g17(a.mean) << ',' << format_g17(a.stderr_) << '\n';
    detail::atomic_write(path, out.str());
}

// Ratios between consecutive plan orders, in plan order.
inline void write_ratio_csv(const std::string& path, const ResultTable& table,
                            const std::vector<int>& orders) {
    std::ostringstream out;
    out << "experiment,order_a,order_b,n,ratio\n";
    std::string experiment = table.rows.empty() ? std::string() : table.rows.front().experiment;
    for (std::size_t i = 0; i + 1 < orders.size(); ++i) {
        for (auto [n, ratio] : ratio_curves(table, orders[i], orders[i + 1]))
            out << experiment << ',' << orders[i] << ',' << orders[i + 1] << ',' << n << ','
                << format_g17(ratio) << '\n';
    }
    detail::atomic_write(path, out.str());
}

} // namespace symdiv
