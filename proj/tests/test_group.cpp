#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "symdiv/group.hpp"
#include "symdiv/rng.hpp"

using namespace symdiv;
using Catch::Approx;

namespace {
Point random_disk_point(SplitMix64& rng) {
    double r = std::sqrt(rng.next_unit());
    double a = 2.0 * std::numbers::pi * rng.next_unit();
    return {r * std::cos(a), r * std::sin(a)};
}
} // namespace

TEST_CASE("apply: quarter rotation, translation, identity") {
    auto rot4 = GroupAction::rotation2d(4);
    auto p = rot4.apply(1, {1.0, 0.0});
    CHECK(p[0] == Approx(0.0).margin(1e-15));
    CHECK(p[1] == Approx(1.0).margin(1e-15));

    auto trans4 = GroupAction::translation_mod1(4);
    CHECK(trans4.apply(1, {0.9})[0] == Approx(0.15).margin(1e-15));

    // index 0 is the identity, bit-exact
    Point x{0.123456789, -0.987654321};
    auto y = rot4.apply(0, x);
    CHECK(y[0] == x[0]);
    CHECK(y[1] == x[1]);
}

TEST_CASE("orbit layouts") {
    auto rot4 = GroupAction::rotation2d(4);
    auto orb = rot4.orbit({1.0, 0.0});
    REQUIRE(orb.size() == 4);
    CHECK(orb[1][1] == Approx(1.0));
    CHECK(orb[2][0] == Approx(-1.0));
    CHECK(orb[3][1] == Approx(-1.0));

    CHECK(GroupAction::trivial().orbit({0.5}).size() == 1);

    auto orb2 = GroupAction::translation_mod1(2).orbit({0.3});
    REQUIRE(orb2.size() == 2);
    CHECK(orb2[0][0] == Approx(0.3));
    CHECK(orb2[1][0] == Approx(0.8));
}

TEST_CASE("project_fundamental picks the sector/interval representative") {
    auto rot4 = GroupAction::rotation2d(4);
    auto p = rot4.project_fundamental({0.0, 1.0});
    CHECK(p[0] == Approx(1.0).margin(1e-12));
    CHECK(p[1] == Approx(0.0).margin(1e-12));

    CHECK(GroupAction::translation_mod1(4).project_fundamental({0.9})[0] ==
          Approx(0.15).margin(1e-12));

    Point x{0.25, -0.75};
    auto t = GroupAction::trivial().project_fundamental(x);
    CHECK(t == x);

    // the origin is its own orbit
    auto o = rot4.project_fundamental({0.0, 0.0});
    CHECK(o[0] == 0.0);
    CHECK(o[1] == 0.0);
}

TEST_CASE("group law, projection idempotence, orbit constancy, isometry") {
    SplitMix64 rng(31);
    for (auto action : {GroupAction::rotation2d(6), GroupAction::rotation2d(16)}) {
        for (int rep = 0; rep < 50; ++rep) {
            Point x = random_disk_point(rng);
            int a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(action.order())));
            int b = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(action.order())));
            auto lhs = action.apply(a, action.apply(b, x));
            auto rhs = action.apply((a + b) % action.order(), x);
            CHECK(euclidean_distance(lhs, rhs) < 1e-12);

            auto t0 = action.project_fundamental(x);
            CHECK(euclidean_distance(action.project_fundamental(t0), t0) < 1e-12);
            CHECK(euclidean_distance(action.project_fundamental(action.apply(a, x)), t0) < 1e-12);

            Point y = random_disk_point(rng);
            CHECK(euclidean_distance(action.apply(a, x), action.apply(a, y)) ==
                  Approx(euclidean_distance(x, y)).margin(1e-12));
        }
    }
    auto trans = GroupAction::translation_mod1(8);
    for (int rep = 0; rep < 50; ++rep) {
        Point x{rng.next_unit()};
        int a = static_cast<int>(rng.next_below(8));
        int b = static_cast<int>(rng.next_below(8));
        auto lhs = trans.apply(a, trans.apply(b, x));
        auto rhs = trans.apply((a + b) % 8, x);
        CHECK(std::abs(lhs[0] - rhs[0]) < 1e-12);
        auto t0 = trans.project_fundamental(x);
        CHECK(t0[0] >= 0.0);
        CHECK(t0[0] < 0.125);
        CHECK(std::abs(trans.project_fundamental(trans.apply(a, x))[0] - t0[0]) < 1e-12);
    }
}

TEST_CASE("is_isometric") {
    CHECK(GroupAction::rotation2d(16).is_isometric());
    CHECK(GroupAction::trivial().is_isometric());
    CHECK_FALSE(GroupAction::translation_mod1(4).is_isometric());
    // the wraparound witness: |sigma(0.9) - sigma(0.1)| = 0.2 while |0.9 - 0.1| = 0.8
    auto trans = GroupAction::translation_mod1(4);
    double moved = std::abs(trans.apply(1, {0.9})[0] - trans.apply(1, {0.1})[0]);
    CHECK(moved == Approx(0.2).margin(1e-15));
}

TEST_CASE("assumption checker: separation fails near the disk origin") {
    auto rot4 = GroupAction::rotation2d(4);
    // sector grid including a point close to the origin
    std::vector<Point> samples;
    for (double r : {1e-7, 0.25, 0.5, 0.75, 1.0})
        for (double frac : {0.0, 0.3, 0.6})
            samples.push_back({r * std::cos(frac * std::numbers::pi / 2.0),
                               r * std::sin(frac * std::numbers::pi / 2.0)});
    double delta0 = 1e-6;
    auto rep = check_assumption_a1(rot4, samples, delta0);

    // brute-force the same quantities over the sampled grid
    double min_gap = 1e300;
    for (const auto& x : samples)
        for (const auto& y : samples)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    if (a == b) continue;
                    min_gap = std::min(min_gap,
                                       euclidean_distance(rot4.apply(a, x), rot4.apply(b, y)));
                }
    CHECK(rep.min_cross_orbit_gap == Approx(min_gap).margin(1e-12));
    CHECK_FALSE(rep.separation_ok); // the r = 1e-7 orbit nearly coincides with itself
    CHECK(rep.noncontraction_ok);   // rotations are isometries
    CHECK(rep.worst_contraction_ratio == Approx(1.0).margin(1e-9));
}

TEST_CASE("assumption checker: translation samples separate") {
    auto trans4 = GroupAction::translation_mod1(4);
    std::vector<Point> samples{{0.05}, {0.1}, {0.15}};
    auto rep = check_assumption_a1(trans4, samples, 0.01);
    CHECK(rep.separation_ok);
    // enumerated by hand: nearest cross-orbit pair is 0.05 + 1/4 against 0.15
    CHECK(rep.min_cross_orbit_gap == Approx(0.15).margin(1e-12));
    CHECK(rep.noncontraction_ok);
}

TEST_CASE("group action argument errors") {
    auto rot4 = GroupAction::rotation2d(4);
    CHECK_THROWS_AS(rot4.apply(4, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(rot4.apply(-1, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(rot4.apply(1, {1.0}), std::invalid_argument);
    auto trans = GroupAction::translation_mod1(4);
    CHECK_THROWS_AS(trans.apply(1, {1.5}), std::domain_error);
    CHECK_THROWS_AS(trans.apply(1, {-0.1}), std::domain_error);
    CHECK_THROWS_AS(check_assumption_a1(rot4, {}, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(GroupAction::rotation2d(0), std::invalid_argument);
}

TEST_CASE("group strings round-trip") {
    for (const char* s : {"trivial", "rot:8", "trans1d:4"})
        CHECK(GroupAction::parse(s).to_string() == s);
    CHECK_THROWS_AS(GroupAction::parse("rot:"), std::invalid_argument);
    CHECK_THROWS_AS(GroupAction::parse("rot:x"), std::invalid_argument);
    CHECK_THROWS_AS(GroupAction::parse("spin:3"), std::invalid_argument);
    CHECK_THROWS_AS(GroupAction::parse("rot:0"), std::invalid_argument);
}
