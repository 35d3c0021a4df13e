// symdiv: sample the benchmark distributions, estimate group-aware
// divergences, check the geometric/kernel assumptions, and run the
// sample-complexity experiments.
//
// Exit codes: 0 success, 2 argument/usage error, 3 resource guard,
// 4 solver non-convergence (diagnostics still printed).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "symdiv/symdiv.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "symdiv 0.1.0";

struct SampleArgs {
    std::string dist;
    int n = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_sample(const SampleArgs& args) {
    auto spec = symdiv::SamplerSpec::parse(args.dist);
    auto coords = spec.draw(args.n, args.seed);
    std::ostringstream body;
    symdiv::write_points_csv(body, spec.dim(), coords);
    if (args.out == "-") {
        std::cout << body.str();
    } else {
        std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + args.out);
        out << body.str();
    }
    return 0;
}

struct EstimateArgs {
    std::string p_path, q_path;
    std::string group = "trivial";
    double lipschitz_L = 1.0;
    std::string method = "auto";
    std::string kernel = "gaussian:s=1";
    std::string path = "auto";
    double alpha = 2.0;
    double tol = 1e-7;
    long max_iters = 200000;
};

symdiv::W1Method parse_w1_method(const std::string& m) {
    if (m == "auto") return symdiv::W1Method::Auto;
    if (m == "cdf1d") return symdiv::W1Method::Cdf1D;
    if (m == "lp") return symdiv::W1Method::TransportLP;
    if (m == "quotient") return symdiv::W1Method::QuotientLP;
    throw std::invalid_argument("unknown method \"" + m + "\" (auto|cdf1d|lp|quotient)");
}

int cmd_estimate(const std::string& divergence, const EstimateArgs& args) {
    auto p = symdiv::read_measure_csv(args.p_path);
    auto q = symdiv::read_measure_csv(args.q_path);
    auto action = symdiv::GroupAction::parse(args.group);
    json out;
    out["divergence"] = divergence;
    json diag;
    diag["group"] = action.to_string();

    if (divergence == "w1") {
        symdiv::W1Config cfg;
        cfg.lipschitz_L = args.lipschitz_L;
        cfg.method = parse_w1_method(args.method);
        symdiv::W1Diagnostics d;
        out["value"] = symdiv::w1_invariant(p, q, action, cfg, &d);
        diag["method"] = d.method;
        diag["p_atoms"] = d.p_atoms;
        diag["q_atoms"] = d.q_atoms;
        if (d.expanded_p) diag["expanded_p"] = d.expanded_p;
        if (d.expanded_q) diag["expanded_q"] = d.expanded_q;
        diag["lp_pivots"] = d.pivots;
        diag["L"] = args.lipschitz_L;
    } else if (divergence == "mmd") {
        auto kernel = symdiv::KernelSpec::parse(args.kernel);
        symdiv::MmdPath path;
        if (args.path == "auto")
            path = symdiv::default_mmd_path(action);
        else if (args.path == "orbit")
            path = symdiv::MmdPath::OrbitExpansion;
        else if (args.path == "symk")
            path = symdiv::MmdPath::SymmetrizedKernel;
        else
            throw std::invalid_argument("unknown path \"" + args.path + "\" (orbit|symk)");
        out["value"] = symdiv::mmd_invariant(p, q, action, kernel, path);
        diag["kernel"] = kernel.to_string();
        diag["path"] = path == symdiv::MmdPath::OrbitExpansion ? "orbit" : "symk";
        diag["p_atoms"] = p.size();
        diag["q_atoms"] = q.size();
    } else if (divergence == "falpha") {
        symdiv::AlphaConfig cfg;
        cfg.alpha = args.alpha;
        cfg.lipschitz_L = args.lipschitz_L;
        cfg.solver.tolerance = args.tol;
        cfg.solver.max_iters = args.max_iters;
        try {
            auto [value, sol] = symdiv::dalpha_invariant(p, q, action, cfg);
            out["value"] = value;
            diag["iterations"] = sol.iterations;
            diag["feasibility_residual"] = sol.feasibility_residual;
            diag["converged"] = sol.converged;
            diag["support_size"] = sol.values.size();
            diag["alpha"] = args.alpha;
            diag["L"] = args.lipschitz_L;
        } catch (const symdiv::solver_error& e) {
            out["value"] = e.best_value;
            diag["iterations"] = e.iterations;
            diag["converged"] = false;
            diag["error"] = e.what();
            out["diagnostics"] = diag;
            std::cout << out.dump() << "\n";
            return 4;
        }
    } else {
        throw std::invalid_argument("unknown divergence \"" + divergence + "\"");
    }
    out["diagnostics"] = diag;
    std::cout << out.dump() << "\n";
    return 0;
}

struct CheckArgs {
    std::string group;
    std::string kernel;
    int grid = 64;
    int a1_grid = 16;
    double min_radius = 1e-6;
    double delta0 = 1e-6;
};

int cmd_check(const CheckArgs& args) {
    auto action = symdiv::GroupAction::parse(args.group);
    std::vector<symdiv::Point> grid;
    std::vector<symdiv::Point> a1_samples;
    switch (action.kind()) {
    case symdiv::GroupKind::Trivial:
        grid = {{0.0}};
        a1_samples = {{0.0}};
        break;
    case symdiv::GroupKind::CyclicRotation2D:
        grid = symdiv::make_sector_grid(action.order(), args.grid, args.grid, args.min_radius);
        a1_samples = symdiv::make_sector_grid(action.order(), args.a1_grid, args.a1_grid,
                                              args.min_radius);
        break;
    case symdiv::GroupKind::CyclicTranslationMod1:
        grid = symdiv::make_interval_grid(action.order(), args.grid * args.grid);
        a1_samples = symdiv::make_interval_grid(action.order(), args.a1_grid * args.a1_grid);
        break;
    }

    json out;
    out["group"] = action.to_string();
    auto a1 = symdiv::check_assumption_a1(action, a1_samples, args.delta0);
    json ja1;
    ja1["delta0"] = args.delta0;
    ja1["separation_ok"] = a1.separation_ok;
    if (std::isfinite(a1.min_cross_orbit_gap))
        ja1["min_cross_orbit_gap"] = a1.min_cross_orbit_gap;
    else
        ja1["min_cross_orbit_gap"] = nullptr; // no sigma != sigma' pairs
    ja1["noncontraction_ok"] = a1.noncontraction_ok;
    ja1["worst_contraction_ratio"] = a1.worst_contraction_ratio;
    ja1["samples"] = a1_samples.size();
    out["assumption_a1"] = ja1;

    if (!args.kernel.empty()) {
        auto kernel = symdiv::KernelSpec::parse(args.kernel);
        auto rep = symdiv::estimate_c_sigma_k(action, kernel, grid);
        json jc;
        jc["kernel"] = kernel.to_string();
        jc["c_sigma_k"] = rep.c;
        jc["C_sigma_k"] = symdiv::c_big(action.order(), rep.c);
        jc["grid_points"] = grid.size();
        if (rep.trivial_group) {
            jc["trivial_group"] = true; // c = 0 by convention, no non-identity elements
        } else {
            jc["argmax_point"] = grid[rep.argmax_index];
            jc["argmax_element"] = rep.argmax_element;
        }
        // Assumption 4.7 needs c < 1 uniformly; near an orbit fixed point
        // (small radii on the disk) the sampled max approaches 1.
        jc["assumption_4_7_violated"] = !rep.trivial_group && rep.c >= 1.0 - 1e-9;
        out["kernel_check"] = jc;
    }
    std::cout << out.dump() << "\n";
    return 0;
}

struct ExperimentArgs {
    std::string name;
    std::vector<int> orders;
    std::vector<int> sizes;
    int replicas = 0;
    std::optional<std::uint64_t> seed;
    double lipschitz_L = 1.0;
    double mog_std = 0.05;
    double alpha = 2.0;
    int fixed_order = 16;
    int jobs = 0;
    std::string out_dir = ".";
};

int cmd_experiment(const ExperimentArgs& args) {
    auto plan = symdiv::plan_by_name(args.name);
    if (!args.orders.empty()) plan.group_orders = args.orders;
    if (!args.sizes.empty()) plan.sizes = args.sizes;
    if (args.replicas > 0) plan.replicas = args.replicas;
    if (args.seed) plan.master_seed = *args.seed;
    plan.lipschitz_L = args.lipschitz_L;
    plan.mog_std = args.mog_std;
    plan.alpha = args.alpha;
    plan.fixed_s_order = args.fixed_order;
    plan.jobs = args.jobs;
    plan.validate();

    std::cerr << "experiment " << plan.name << ": " << plan.group_orders.size() << " orders x "
              << plan.sizes.size() << " sizes x " << plan.replicas << " replicas\n";
    auto table = symdiv::run(plan, [](std::size_t done, std::size_t total) {
        if (done == total || done % 16 == 0)
            std::cerr << "\r  " << done << "/" << total << " cells" << (done == total ? "\n" : "")
                      << std::flush;
    });

    std::string base = args.out_dir;
    if (!base.empty() && base.back() != '/') base += '/';
    base += plan.name;
    symdiv::write_raw_csv(base + "_raw.csv", table);
    symdiv::write_aggregate_csv(base + "_aggregate.csv", table);
    symdiv::write_ratio_csv(base + "_ratio.csv", table, plan.group_orders);
    std::cerr << "wrote " << base << "_{raw,aggregate,ratio}.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Divergence estimation between group-invariant distributions"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML config file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "Draw from a benchmark distribution to CSV");
    sample->add_option("--dist", sample_args.dist,
                       "wss1d:r=<n> | mog8:std=<s> | disk:l=<n>")->required();
    sample->add_option("--n", sample_args.n, "sample count")->required()->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_args.seed, "RNG seed")->default_val(0);
    sample->add_option("--out", sample_args.out, "output CSV path, or - for stdout")->required();

    EstimateArgs est_args;
    std::string est_divergence;
    auto* estimate = app.add_subcommand("estimate", "Estimate a divergence between two sample files");
    estimate->add_option("divergence", est_divergence, "w1 | mmd | falpha")->required();
    estimate->add_option("--p", est_args.p_path, "first sample CSV")->required();
    estimate->add_option("--q", est_args.q_path, "second sample CSV")->required();
    estimate->add_option("--group", est_args.group, "trivial | rot:<n> | trans1d:<n>");
    estimate->add_option("--L", est_args.lipschitz_L, "Lipschitz constant");
    estimate->add_option("--method", est_args.method, "w1: auto|cdf1d|lp|quotient");
    estimate->add_option("--kernel", est_args.kernel, "mmd: gaussian:s=<bandwidth>");
    estimate->add_option("--path", est_args.path, "mmd: orbit|symk");
    estimate->add_option("--alpha", est_args.alpha, "falpha: alpha > 1");
    estimate->add_option("--tol", est_args.tol, "falpha: solver tolerance");
    estimate->add_option("--max-iters", est_args.max_iters, "falpha: iteration cap");

    CheckArgs check_args;
    auto* check = app.add_subcommand("check", "Run the assumption checkers for a group/kernel");
    check->add_option("--group", check_args.group, "group string")->required();
    check->add_option("--kernel", check_args.kernel, "optional kernel for the c_{Sigma,k} scan");
    check->add_option("--grid", check_args.grid, "kernel grid resolution per axis")
        ->default_val(64);
    check->add_option("--a1-grid", check_args.a1_grid, "separation-check grid resolution per axis")
        ->default_val(16);
    check->add_option("--min-radius", check_args.min_radius,
                      "smallest grid radius; 0 includes the origin")
        ->default_val(1e-6);
    check->add_option("--delta0", check_args.delta0, "separation margin")->default_val(1e-6);

    ExperimentArgs exp_args;
    auto* experiment = app.add_subcommand("experiment", "Run a replicated sample-size sweep");
    experiment->add_option("--name", exp_args.name,
                           "wss1d | wss2d | mmd-disk-fixed | mmd-disk-adaptive | falpha1d")
        ->required();
    experiment->add_option("--orders", exp_args.orders, "group orders (default per plan)");
    experiment->add_option("--sizes", exp_args.sizes, "sample sizes (default per plan)");
    experiment->add_option("--replicas", exp_args.replicas, "replicas per cell (default 10)");
    experiment->add_option("--seed", exp_args.seed, "master seed");
    experiment->add_option("--L", exp_args.lipschitz_L, "Lipschitz constant");
    experiment->add_option("--std", exp_args.mog_std, "mog8 component std (wss2d)");
    experiment->add_option("--alpha", exp_args.alpha, "alpha (falpha1d)");
    experiment->add_option("--fixed-order", exp_args.fixed_order,
                           "bandwidth order l for mmd-disk-fixed: s = 2*pi/(6*l)");
    experiment->add_option("--jobs", exp_args.jobs,
                           "worker threads (default: SYMDIV_JOBS, then hardware)")
        ->envname("SYMDIV_JOBS");
    experiment->add_option("--out-dir", exp_args.out_dir, "output directory")->default_val(".");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(sample)) return cmd_sample(sample_args);
        if (app.got_subcommand(estimate)) return cmd_estimate(est_divergence, est_args);
        if (app.got_subcommand(check)) return cmd_check(check_args);
        if (app.got_subcommand(experiment)) return cmd_experiment(exp_args);
    } catch (const symdiv::resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const symdiv::solver_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
