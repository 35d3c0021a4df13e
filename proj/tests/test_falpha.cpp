#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "symdiv/falpha.hpp"
#include "symdiv/rng.hpp"
#include "symdiv/w1.hpp"

using namespace symdiv;
using Catch::Approx;

namespace {

EmpiricalMeasure random_interval_measure(SplitMix64& rng, std::size_t atoms) {
    std::vector<double> coords(atoms);
    for (auto& c : coords) c = rng.next_unit();
    return EmpiricalMeasure::from_samples(1, std::move(coords));
}

} // namespace

TEST_CASE("f_alpha values") {
    CHECK(f_alpha(2.0, 3.0) == Approx(4.0));
    CHECK(f_alpha(2.0, 1.0) == 0.0);
    CHECK(f_alpha(3.0, 1.0) == 0.0);
    CHECK(f_alpha(2.0, 0.0) == Approx(-0.5));
    CHECK_THROWS_AS(f_alpha(2.0, -0.1), std::domain_error);
    CHECK_THROWS_AS(f_alpha(1.0, 2.0), std::invalid_argument);
}

TEST_CASE("f_alpha_star is the true conjugate") {
    CHECK(f_alpha_star(2.0, 1.0) == Approx(1.0));
    CHECK(f_alpha_star(2.0, -1.0) == Approx(0.5));
    CHECK(f_alpha_star(2.0, 0.0) == Approx(0.5)); // continuous at 0

    // conjugate inequality f*(y) >= x y - f(x), with equality at the argmax
    SplitMix64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        double alpha = 1.2 + 2.5 * rng.next_unit();
        double y = 6.0 * rng.next_unit() - 3.0;
        double fstar = f_alpha_star(alpha, y);
        double sup = -f_alpha(alpha, 0.0);
        for (double x = 0.0; x <= 5.0; x += 0.01)
            sup = std::max(sup, x * y - f_alpha(alpha, x));
        CHECK(fstar >= sup - 1e-9);
        CHECK(fstar <= sup + 2e-2); // grid gap on the argmax
        CHECK(fstar >= y - 1e-12);  // f*(y) >= y since f(1) = 0
    }
}

TEST_CASE("f_alpha_star_derivative matches finite differences") {
    CHECK(f_alpha_star_derivative(2.0, 2.0) == Approx(2.0));
    CHECK(f_alpha_star_derivative(2.0, -1.0) == 0.0);
    CHECK(f_alpha_star_derivative(3.5, -7.0) == 0.0);

    double h = 1e-5;
    double fd = (f_alpha_star(3.0, 1.3 + h) - f_alpha_star(3.0, 1.3 - h)) / (2.0 * h);
    CHECK(f_alpha_star_derivative(3.0, 1.3) == Approx(fd).margin(1e-6));
}

TEST_CASE("bound constants") {
    auto b = bound_constants(2.0, 1.0, 2.0);
    CHECK(b.m0 == 3.0);
    CHECK(b.l_prime == 3.0);
    CHECK(b.m1 == 5.0);

    auto z = bound_constants(2.0, 1.0, 0.0);
    CHECK(z.m0 == 1.0);
    CHECK(z.l_prime == 1.0);
    CHECK(z.m1 == 1.0);

    auto s = bound_constants(3.0, 1.0, 1.0);
    CHECK(s.m0 == Approx(1.5));
    CHECK(s.m1 >= s.m0);
}

TEST_CASE("dalpha_invariant: identical measures sit at zero") {
    SplitMix64 rng(89);
    auto p = random_interval_measure(rng, 5);
    AlphaConfig cfg;
    cfg.alpha = 2.0;
    auto [value, sol] = dalpha_invariant(p, p, GroupAction::trivial(), cfg);
    CHECK(std::abs(value) <= 1e-6);
    CHECK(sol.feasibility_residual <= 1e-7);
    CHECK(sol.converged);
}

TEST_CASE("dalpha_invariant: two-atom instance against the grid oracle") {
    auto p = EmpiricalMeasure::from_samples(1, {0.0});
    auto q = EmpiricalMeasure::from_samples(1, {1.0});
    AlphaConfig cfg;
    cfg.alpha = 2.0;
    cfg.lipschitz_L = 1.0;
    auto prog = build_dalpha_program(p, q, GroupAction::trivial(), cfg);
    double oracle_value = oracle::dalpha_grid(prog);
    auto [value, sol] = dalpha_invariant(p, q, GroupAction::trivial(), cfg);
    CHECK(value == Approx(oracle_value).margin(2e-3));
    CHECK(value == Approx(1.0).margin(2e-3)); // optimum at gamma = (2, 1)
    CHECK(sol.feasibility_residual <= 1e-7);
}

TEST_CASE("dalpha_invariant properties on random small instances") {
    SplitMix64 rng(97);
    auto trans2 = GroupAction::translation_mod1(2);
    for (int rep = 0; rep < 12; ++rep) {
        double alpha = (rep % 3 == 0) ? 1.5 : (rep % 3 == 1 ? 2.0 : 3.0);
        auto p = random_interval_measure(rng, 2 + rng.next_below(3));
        auto q = random_interval_measure(rng, 2 + rng.next_below(3));
        AlphaConfig cfg;
        cfg.alpha = alpha;
        auto [value, sol] = dalpha_invariant(p, q, trans2, cfg);

        CHECK(value >= -1e-6);
        W1Config wcfg;
        CHECK(value <= w1_invariant(p, q, trans2, wcfg) + 1e-6);
        CHECK(sol.feasibility_residual <= 1e-7);

        // reported objective is the objective at the reported values
        auto prog = build_dalpha_program(p, q, trans2, cfg);
        CHECK(sol.objective == Approx(prog.objective(sol.values)).margin(1e-12));
    }
}

TEST_CASE("dalpha_invariant is monotone in the Lipschitz bound") {
    SplitMix64 rng(101);
    auto p = random_interval_measure(rng, 3);
    auto q = random_interval_measure(rng, 4);
    AlphaConfig lo, hi;
    lo.alpha = hi.alpha = 2.0;
    lo.lipschitz_L = 0.5;
    hi.lipschitz_L = 2.0;
    double vlo = dalpha_invariant(p, q, GroupAction::trivial(), lo).first;
    double vhi = dalpha_invariant(p, q, GroupAction::trivial(), hi).first;
    CHECK(vlo <= vhi + 1e-6);
}

TEST_CASE("solver gradient matches finite differences of the objective") {
    SplitMix64 rng(103);
    auto p = random_interval_measure(rng, 3);
    auto q = random_interval_measure(rng, 3);
    AlphaConfig cfg;
    cfg.alpha = 2.5;
    auto prog = build_dalpha_program(p, q, GroupAction::translation_mod1(2), cfg);

    std::vector<double> g(prog.size);
    for (auto& x : g) x = 0.4 * (2.0 * rng.next_unit() - 1.0) + 0.5;
    std::vector<double> grad(prog.size);
    prog.gradient(g, grad);
    const double h = 1e-6;
    for (std::size_t u = 0; u < prog.size; ++u) {
        auto gp = g, gm = g;
        gp[u] += h;
        gm[u] -= h;
        double fd = (prog.objective(gp) - prog.objective(gm)) / (2.0 * h);
        double scale = std::max(1.0, std::abs(grad[u]));
        CHECK(std::abs(grad[u] - fd) / scale < 1e-6);
    }
}

TEST_CASE("orbit-representative invariance of dalpha_invariant") {
    SplitMix64 rng(107);
    auto rot4 = GroupAction::rotation2d(4);
    std::vector<double> pc, qc;
    for (int i = 0; i < 3; ++i) {
        double r = 0.2 + 0.7 * rng.next_unit();
        double a = 2.0 * std::numbers::pi * rng.next_unit();
        pc.insert(pc.end(), {r * std::cos(a), r * std::sin(a)});
        r = 0.2 + 0.7 * rng.next_unit();
        a = 2.0 * std::numbers::pi * rng.next_unit();
        qc.insert(qc.end(), {r * std::cos(a), r * std::sin(a)});
    }
    auto p = EmpiricalMeasure::from_samples(2, pc);
    auto q = EmpiricalMeasure::from_samples(2, qc);
    AlphaConfig cfg;
    cfg.alpha = 2.0;
    double before = dalpha_invariant(p, q, rot4, cfg).first;

    auto resample = [&](const EmpiricalMeasure& m) {
        std::vector<double> coords = m.coords();
        for (std::size_t i = 0; i < m.size(); ++i) {
            int a = static_cast<int>(rng.next_below(4));
            rot4.apply_inplace(a, coords.data() + 2 * i, 2);
        }
        return EmpiricalMeasure(2, std::move(coords), m.weights());
    };
    double after = dalpha_invariant(resample(p), resample(q), rot4, cfg).first;
    CHECK(after == Approx(before).margin(2e-6));
}

TEST_CASE("alpha validation and support guard") {
    auto p = EmpiricalMeasure::from_samples(1, {0.1});
    AlphaConfig bad;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(dalpha_invariant(p, p, GroupAction::trivial(), bad), std::invalid_argument);
    bad.alpha = 0.5;
    CHECK_THROWS_AS(dalpha_invariant(p, p, GroupAction::trivial(), bad), std::invalid_argument);

    std::vector<double> coords(kAlphaSupportGuard + 1);
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = static_cast<double>(i);
    auto big = EmpiricalMeasure::from_samples(1, std::move(coords));
    AlphaConfig cfg;
    CHECK_THROWS_AS(build_dalpha_program(big, p, GroupAction::trivial(), cfg), resource_error);
}
