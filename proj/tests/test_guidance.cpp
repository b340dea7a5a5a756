// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pilotwave;
using namespace pilotwave::testing;
using Catch::Approx;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

PilotWave ho_product(std::vector<std::vector<int>> levels, double w = 1.0, double m = 1.0) {
    std::vector<SingleParticleState> s;
    for (auto& l : levels) s.push_back(make_oscillator_eigenstate(l, w, m));
    return make_product(s);
}

}  // namespace

TEST_CASE("species table validation", "[guidance]") {
    CHECK_THROWS_AS(SpeciesTable({{0.0, 0.0, Statistics::boson, 0.0, ""}}), ParameterError);
    CHECK_THROWS_AS(SpeciesTable({{1.0, 0.0, Statistics::fermion, 0.0, ""}, {2.0, 0.0, Statistics::fermion, 0.0, ""}}),
                    ParameterError);
    CHECK_THROWS_AS(SpeciesTable({{1.0, 1.0, Statistics::boson, 0.0, ""}, {1.0, 0.5, Statistics::boson, 0.0, ""}}),
                    ParameterError);
    CHECK_NOTHROW(SpeciesTable({{1.0, 0.0, Statistics::distinguishable, 0.0, "a"},
                                {2.0, 1.0, Statistics::distinguishable, 0.0, "b"}}));
    CHECK_THROWS_AS(SpeciesTable::uniform(2, 1.0, 0.0, Statistics::anyon, 2.0), ParameterError);
    CHECK_THROWS_AS(GuidanceField(ho_product({{0}, {1}}), SpeciesTable::uniform(2, 1.0, 0.0, Statistics::anyon, 0.5)),
                    ParameterError);
    CHECK_THROWS_AS(GuidanceField(ho_product({{0}}), SpeciesTable::uniform(2, 1.0, 0.0, Statistics::boson)), ParameterError);
    const auto t = SpeciesTable::uniform(3, 1.0, 0.0, Statistics::fermion);
    CHECK(t.all_identical());
    CHECK_FALSE(SpeciesTable::uniform(2, 1.0, 0.0, Statistics::distinguishable).all_identical());
}

TEST_CASE("free packet velocity", "[guidance]") {
    auto psi = make_product({make_gaussian_packet({0.0}, {0.0}, 1.0)});
    const auto species = SpeciesTable::uniform(1, 1.0, 0.0, Statistics::distinguishable);
    for (double t : {0.0, 0.5, 2.0}) {
        for (double x : {-1.3, 0.2, 2.0}) {
            const auto v = velocity_field(psi, species, {}, Configuration(1, 1, {x}), t);
            CHECK(v[0] == Approx(x * t / (4.0 + t * t)).margin(1e-14));
        }
    }
    // boosted packet at its centre moves with p / m
    auto boosted = make_product({make_gaussian_packet({1.0, 0.0}, {0.6, -0.2}, 0.8, 2.0)});
    const auto heavy = SpeciesTable::uniform(1, 2.0, 0.0, Statistics::distinguishable);
    const auto v = velocity_field(boosted, heavy, {}, Configuration(1, 2, {1.0, 0.0}), 0.0);
    CHECK(v[0] == Approx(0.3).epsilon(1e-14));
    CHECK(v[1] == Approx(-0.1).epsilon(1e-14));
}

TEST_CASE("real stationary states are at rest", "[guidance]") {
    auto psi = symmetrize(ho_product({{0, 0}, {1, 0}}));
    const auto species = SpeciesTable::uniform(2, 1.0, 0.0, Statistics::boson);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 30; ++i) {
        const auto x = random_non_node(rng, psi, 3.0);
        for (double v : velocity_field(psi, species, {}, x, 3.0)) CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("relative velocity vanishes at coincidence", "[guidance][property]") {
    // states whose relative part is not a function of the centre of mass alone
    const auto boson_1d = superpose({{1.0, symmetrize(ho_product({{0}, {1}}))},
                                     {Complex(0.6, 0.8), symmetrize(ho_product({{1}, {2}}))}});
    const auto fermion_1d = superpose({{1.0, antisymmetrize(ho_product({{0}, {1}}))},
                                       {Complex(0.0, 1.0), antisymmetrize(ho_product({{1}, {2}}))}});
    const auto boson_2d = superpose({{1.0, symmetrize(ho_product({{0, 0}, {1, 0}}))},
                                     {Complex(0.0, 1.0), symmetrize(ho_product({{0, 1}, {1, 0}}))}});
    std::mt19937_64 rng(19);
    std::normal_distribution<double> normal(0.0, 0.7);
    for (const auto& [psi, stats] : {std::pair{boson_1d, Statistics::boson}, std::pair{fermion_1d, Statistics::fermion},
                                     std::pair{boson_2d, Statistics::boson}}) {
        GuidanceField f(psi, SpeciesTable::uniform(2, 1.0, 0.0, stats));
        const std::size_t d = psi.dim();
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> centre(d), dir(d);
            double n2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                centre[a] = normal(rng);
                dir[a] = normal(rng);
                n2 += dir[a] * dir[a];
            }
            std::vector<double> speed;
            for (double r : {1e-3, 1e-4, 1e-5}) {
                std::vector<double> c(2 * d);
                for (std::size_t a = 0; a < d; ++a) {
                    c[a] = centre[a] + 0.5 * r * dir[a] / std::sqrt(n2);
                    c[d + a] = centre[a] - 0.5 * r * dir[a] / std::sqrt(n2);
                }
                const auto v = f.velocity(Configuration(2, d, c), 0.3);
                double s = 0.0;
                for (std::size_t a = 0; a < d; ++a) s += (v[a] - v[d + a]) * (v[a] - v[d + a]);
                speed.push_back(std::sqrt(s));
            }
            INFO("|v_rel| at 1e-3, 1e-4, 1e-5: " << speed[0] << " " << speed[1] << " " << speed[2]);
            CHECK(speed[1] < speed[0]);
            CHECK(speed[2] < speed[1]);
            CHECK(speed[2] < 0.2 * speed[1]);
            // linear vanishing while the determinant is still free of cancellation
            CHECK(speed[1] / 1e-4 == Approx(speed[0] / 1e-3).epsilon(0.05));
        }
    }
}

TEST_CASE("velocity at a node raises", "[guidance]") {
    auto anti = antisymmetrize(ho_product({{0}, {1}}));
    const auto species = SpeciesTable::uniform(2, 1.0, 0.0, Statistics::fermion);
    CHECK_THROWS_AS(velocity_field(anti, species, {}, Configuration(2, 1, {0.5, 0.5}), 0.0), NodeError);
}

TEST_CASE("velocity matches the finite-difference phase gradient", "[guidance][property]") {
    auto psi = superpose({{1.0, ho_product({{0}, {1}})}, {Complex(0.0, 1.0), ho_product({{2}, {0}})}});
    const SpeciesTable species({{1.0, 0.0, Statistics::distinguishable, 0.0, "a"},
                                {1.0, 0.0, Statistics::distinguishable, 0.0, "b"}});
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_non_node(rng, psi, 0.3);
        const auto fd = finite_difference_gradient(psi, x, 0.3, 1e-5);
        const Complex v0 = evaluate(psi, x, 0.3);
        const auto v = velocity_field(psi, species, {}, x, 0.3);
        for (std::size_t k = 0; k < 2; ++k) CHECK(v[k] == Approx((fd[k] / v0).imag()).margin(1e-6));
    }
}

TEST_CASE("permutation equivariance of the velocity field", "[guidance][property]") {
    auto psi = superpose({{1.0, antisymmetrize(ho_product({{0, 0}, {1, 0}, {0, 1}}))},
                          {Complex(0.3, 0.9), antisymmetrize(ho_product({{0, 0}, {2, 0}, {1, 1}}))}});
    const auto species = SpeciesTable::uniform(3, 1.0, 0.0, Statistics::fermion);
    std::mt19937_64 rng(12);
    for (const auto& p : all_permutations(3)) {
        for (int i = 0; i < 10; ++i) {
            const auto x = random_non_node(rng, psi, 0.6);
            const auto v = velocity_field(psi, species, {}, x, 0.6);
            const auto vp = velocity_field(psi, species, {}, apply(p, x), 0.6);
            CHECK(max_diff(vp, apply_flat<double>(p, v, 2)) < 1e-12);
        }
    }
}

TEST_CASE("gauge invariance of the guidance field", "[guidance][property]") {
    auto psi = superpose({{1.0, ho_product({{0, 0}, {1, 0}})}, {Complex(0.0, 1.0), ho_product({{0, 1}, {0, 0}})}});
    const SpeciesTable species({{1.0, 1.0, Statistics::distinguishable, 0.0, "a"},
                                {1.5, -0.7, Statistics::distinguishable, 0.0, "b"}});
    const auto a = VectorPotential{}.plus_gradient(make_linear_field({0.2, -0.1}));
    const auto flux = make_flux_line(0.8, {3.0, 3.0});

    std::mt19937_64 rng(33);
    for (const auto& base : {VectorPotential{}, a, flux}) {
        for (const auto& chi : {make_constant_field(0.7), make_linear_field({1.3, -0.4}, 0.2)}) {
            const auto [psi2, a2] = gauge_transform(psi, species, base, chi);
            for (int i = 0; i < 20; ++i) {
                const auto x = random_non_node(rng, psi, 0.4);
                CHECK(max_diff(velocity_field(psi, species, base, x, 0.4), velocity_field(psi2, species, a2, x, 0.4)) <= 1e-10);
            }
        }
    }

    // removing a flux line locally with the angle gauge
    const auto chi = make_flux_angle_field(0.8, {3.0, 3.0});
    const auto [psi3, a3] = gauge_transform(psi, species, flux, chi);
    for (int i = 0; i < 20; ++i) {
        const auto x = random_non_node(rng, psi, 0.4);
        CHECK(max_diff(velocity_field(psi, species, flux, x, 0.4), velocity_field(psi3, species, a3, x, 0.4)) <= 1e-10);
        const auto ax = a3.at(x.position(0));
        CHECK(std::abs(ax[0]) < 1e-12);
        CHECK(std::abs(ax[1]) < 1e-12);
    }
}

TEST_CASE("a biased field breaks gauge invariance and equivariance", "[guidance]") {
    auto psi = make_product({make_gaussian_packet({0.0, 0.0}, {0.0, 0.0}, 1.0), make_gaussian_packet({1.0, 0.0}, {0.0, 0.0}, 1.0)});
    const auto species = SpeciesTable::uniform(2, 1.0, 1.0, Statistics::distinguishable);
    const auto [psi2, a2] = gauge_transform(psi, species, {}, make_linear_field({1.0, 0.0}));
    const FieldPerturbation bias{0.05};
    const auto x = Configuration(2, 2, {0.1, 0.2, 0.9, -0.1});
    const auto v1 = GuidanceField(psi, species, {}, bias).velocity(x, 0.3);
    const auto v2 = GuidanceField(psi2, species, a2, bias).velocity(x, 0.3);
    CHECK(max_diff(v1, v2) > 1e-3);
}

TEST_CASE("flux line potential and loop integrals", "[guidance]") {
    const auto a = make_flux_line(1.7, {0.5, -0.5});
    for (double r : {0.1, 1.0, 5.0}) CHECK(loop_integral(a, circle_loop({0.5, -0.5}, r)) == Approx(1.7).margin(1e-8));
    // loops not enclosing the line carry no flux
    CHECK(std::abs(loop_integral(a, circle_loop({3.0, 0.0}, 1.0))) < 1e-8);
    CHECK(loop_integral(a, circle_loop({0.8, -0.3}, 1.0)) == Approx(1.7).margin(1e-8));
    CHECK_THROWS_AS(a.at(std::vector<double>{0.5, -0.5}), DomainError);
    CHECK(a.negated().total_flux() == Approx(-1.7));
    CHECK(loop_integral(a.negated(), circle_loop({0.5, -0.5}, 1.0)) == Approx(-1.7).margin(1e-8));
    // pure gauge terms integrate to zero around closed loops
    const auto g = VectorPotential{}.plus_gradient(make_linear_field({2.0, 3.0}));
    CHECK(std::abs(loop_integral(g, circle_loop({0.0, 0.0}, 2.0))) < 1e-12);
    CHECK_THROWS_AS(GuidanceField(ho_product({{0}}), SpeciesTable::uniform(1, 1.0, 1.0, Statistics::distinguishable), a),
                    ParameterError);
}

TEST_CASE("circulation of the anyon pair velocity", "[guidance]") {
    for (double nu : {0.5, 1.0, 0.25}) {
        for (int k : {0, 1}) {
            const double mass = 1.3;
            auto psi = make_anyon_pair_state(nu, k, 1.0, mass);
            const auto species = SpeciesTable::uniform(2, mass, 0.0, Statistics::anyon, nu);
            const double mu = mass / 2.0;
            const double ell = nu + 2 * k;
            for (double r : {0.5, 1.0, 2.0}) {
                const double c = circulation(psi, species, {}, circle_loop({0.0, 0.0}, r), 0.7, {0.3, -0.2});
                CHECK(c == Approx(2.0 * kPi * ell / mu).margin(1e-6));
            }
            // a loop that excludes the coincidence point has no circulation
            CHECK(std::abs(circulation(psi, species, {}, circle_loop({2.0, 0.0}, 0.5), 0.0)) < 1e-6);
        }
    }
}

TEST_CASE("time reversal flips velocities at the pivot", "[guidance]") {
    auto psi = superpose({{1.0, ho_product({{0}})}, {Complex(0.4, 0.3), ho_product({{1}})}});
    const auto species = SpeciesTable::uniform(1, 1.0, 0.0, Statistics::distinguishable);
    auto rev = time_reversed_wave(psi, 1.2);
    for (double x : {-0.5, 0.1, 0.9}) {
        for (double s : {0.0, 0.3, 1.1}) {
            const auto v = velocity_field(psi, species, {}, Configuration(1, 1, {x}), 1.2 + s);
            const auto vr = velocity_field(rev, species, {}, Configuration(1, 1, {x}), 1.2 - s);
            CHECK(vr[0] == Approx(-v[0]).margin(1e-13));
        }
    }
}
