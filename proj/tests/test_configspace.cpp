// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pilotwave;
using namespace pilotwave::testing;
using Catch::Approx;

TEST_CASE("reduced representative examples", "[configspace]") {
    const auto x = Configuration::from_positions({{2.0, 1.0}, {-1.0, 5.0}, {2.0, 0.0}});
    const auto r = reduced_representative(x).representative;
    CHECK(r == Configuration::from_positions({{-1.0, 5.0}, {2.0, 0.0}, {2.0, 1.0}}));
    CHECK(reduced_representative(Configuration(2, 1, {1.0, 1.0})).representative == Configuration(2, 1, {1.0, 1.0}));
}

TEST_CASE("reduced representative is idempotent and permutation invariant", "[configspace][property]") {
    std::mt19937_64 rng(17);
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto perms = all_permutations(n);
        for (std::size_t d = 1; d <= 3; ++d) {
            for (int i = 0; i < 25; ++i) {
                const auto x = random_configuration(rng, n, d);
                const auto r = reduced_representative(x);
                CHECK(reduced_representative(r.representative) == r);
                for (const auto& p : perms) CHECK(reduced_representative(apply(p, x)) == r);
                // the representative is a relabelling of x
                CHECK(apply(canonical_order(x.view()), x) == r.representative);
            }
        }
    }
}

TEST_CASE("minimum pairwise distance", "[configspace]") {
    CHECK(min_pairwise_distance(Configuration(2, 2, {0.0, 0.0, 3.0, 4.0})) == 5.0);
    CHECK(min_pairwise_distance(Configuration(3, 1, {0.0, 1.0, 0.0})) == 0.0);
    CHECK_THROWS_AS(min_pairwise_distance(Configuration(1, 3, {0.0, 1.0, 2.0})), ParameterError);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_configuration(rng, 4, 3);
        double brute = 1e300;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b)
                if (a != b) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < 3; ++k) s += (x(a, k) - x(b, k)) * (x(a, k) - x(b, k));
                    brute = std::min(brute, std::sqrt(s));
                }
        CHECK(min_pairwise_distance(x) == Approx(brute).epsilon(1e-15));
        for (const auto& p : all_permutations(4)) CHECK(min_pairwise_distance(apply(p, x)) == min_pairwise_distance(x));
    }
}

TEST_CASE("lifts of a reduced trajectory", "[configspace]") {
    Trajectory traj;
    traj.particles = 3;
    traj.dim = 1;
    for (int j = 0; j <= 10; ++j) {
        const double t = 0.1 * j;
        traj.samples.push_back({t, Configuration(3, 1, {-1.0 - t, 0.0, 1.0 + t}), {-1.0, 0.0, 1.0}});
    }
    const auto lifts = lift_trajectory(traj);
    CHECK(lifts.lifts.size() == 6);
    CHECK_FALSE(lifts.degenerate);
    for (std::size_t i = 0; i < lifts.lifts.size(); ++i) {
        const auto& l = lifts.lifts[i];
        CHECK(reduced_trajectory(l).samples.back().x == reduced_trajectory(traj).samples.back().x);
        CHECK(l.samples[3].v == apply_flat<double>(lifts.permutations[i], traj.samples[3].v, 1));
    }

    // a path through the coincidence set merges the lifts that agree
    Trajectory touching = traj;
    for (auto& s : touching.samples) s.x.coords()[0] = s.x(1, 0);
    const auto merged = lift_trajectory(touching);
    CHECK(merged.degenerate);
    CHECK_FALSE(merged.warning.empty());
    CHECK(merged.lifts.size() == 3);

    Trajectory big;
    big.particles = 7;
    big.dim = 1;
    CHECK_THROWS_AS(lift_trajectory(big), CapabilityError);
}

TEST_CASE("crossing detection", "[configspace]") {
    Trajectory line;
    line.particles = 2;
    line.dim = 1;
    for (int j = 0; j <= 10; ++j) {
        const double t = 0.1 * j;
        line.samples.push_back({t, Configuration(2, 1, {-1.0 + 2.0 * t, 1.0 - 2.0 * t}), {}});
    }
    const auto c = detect_crossing(line);
    CHECK(c.crossed);
    CHECK(c.time == Approx(0.5));

    Trajectory apart = line;
    for (auto& s : apart.samples) s.x = Configuration(2, 1, {-1.0 - s.t, 1.0 + s.t});
    CHECK_FALSE(detect_crossing(apart).crossed);

    Trajectory plane;
    plane.particles = 2;
    plane.dim = 2;
    for (int j = 0; j <= 10; ++j) {
        const double t = 0.1 * j;
        // particle 0 moves right along y = 0 early; particle 1 moves down along x = 0.5 later
        plane.samples.push_back({t, Configuration(2, 2, {-1.0 + 2.0 * t, 0.0, 0.5, 1.0 - 2.0 * t}), {}});
    }
    CHECK(detect_crossing(plane).crossed);
    Trajectory parallel = plane;
    for (auto& s : parallel.samples) s.x = Configuration(2, 2, {s.t, 0.0, s.t, 1.0});
    CHECK_FALSE(detect_crossing(parallel).crossed);

    Trajectory space;
    space.particles = 2;
    space.dim = 3;
    space.samples.push_back({0.0, Configuration(2, 3, {0.0, 0.0, 0.0, 1.0, 0.0, 0.0}), {}});
    space.samples.push_back({0.1, Configuration(2, 3, {0.5, 0.0, 0.0, 0.5 + 1e-9, 0.0, 0.0}), {}});
    CHECK(detect_crossing(space).crossed);
}

TEST_CASE("trajectory mismatch", "[configspace]") {
    Trajectory a;
    a.particles = 1;
    a.dim = 1;
    Trajectory b = a;
    for (int j = 0; j <= 10; ++j) {
        a.samples.push_back({0.1 * j, Configuration(1, 1, {0.0}), {}});
        b.samples.push_back({0.1 * j, Configuration(1, 1, {0.01 * j}), {}});
    }
    CHECK(trajectory_mismatch(a, b) == Approx(0.1));
    CHECK(trajectory_mismatch(a, b, 0.5) == Approx(0.05));
}
