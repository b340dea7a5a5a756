// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance battery: twelve criteria at full size, one PASS/FAIL line each.
// Oracles are computed here (finite differences, closed forms, explicit
// relabelling, trapezoidal loop sums, direct histogramming) and never reuse
// the library routine under test.

#include <pilotwave/experiments.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace pilotwave;
namespace ex = pilotwave::experiments;
namespace fs = std::filesystem;

namespace {

const std::string kScenarioDir = PILOTWAVE_SCENARIO_DIR;
const std::vector<std::string> kBundled{"fermion_noncross",     "boson_noncross",         "boson_coincident_forever",
                                        "anyon_circulation",    "ab_gauge_invariance",    "equivariance_superposition",
                                        "distinguishable_cross", "time_reversal_roundtrip", "permutation_equivariance"};

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
    bool passed;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

ex::Scenario bundled(const std::string& name) { return ex::load_scenario(kScenarioDir + "/" + name + ".json"); }

ex::Scenario bundled_with_count(const std::string& name, std::size_t count) {
    std::ifstream in(kScenarioDir + "/" + name + ".json");
    auto doc = ex::Json::parse(in);
    doc["initial"]["count"] = count;
    return ex::parse_scenario(doc);
}

Configuration random_non_node(std::mt19937_64& rng, const PilotWave& psi, double t, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    while (true) {
        std::vector<double> c(psi.particles() * psi.dim());
        for (auto& v : c) v = normal(rng);
        Configuration x(psi.particles(), psi.dim(), c);
        if (std::abs(evaluate(psi, x, t)) > 1e-6 * psi.peak()) return x;
    }
}

double pair_distance_oracle(const Configuration& x, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t a = 0; a < x.dim(); ++a) s += (x(i, a) - x(j, a)) * (x(i, a) - x(j, a));
    return std::sqrt(s);
}

SingleParticleState ho(std::vector<int> levels) { return make_oscillator_eigenstate(levels, 1.0, 1.0); }

// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
    const std::vector<std::pair<std::string, PilotWave>> family{
        {"gaussian_packet 1d", make_product({make_gaussian_packet({0.3}, {1.1}, 0.8, 1.4)})},
        {"gaussian_packet 3d", make_product({make_gaussian_packet({0.2, -0.4, 0.1}, {0.3, -0.7, 1.0}, 1.1, 0.8)})},
        {"oscillator 1d", make_product({make_oscillator_eigenstate({4}, 1.3, 0.6)})},
        {"oscillator 2d", make_product({make_oscillator_eigenstate({2, 1}, 0.9, 1.2)})},
        {"product", make_product({ho({1, 0}), make_gaussian_packet({0.5, 0.0}, {0.0, 1.0}, 1.0)})},
        {"symmetrized", symmetrize(make_product({ho({0}), ho({1}), ho({2})}))},
        {"antisymmetrized", antisymmetrize(make_product({ho({0, 0}), ho({1, 0}), ho({0, 1})}))},
        {"superposition", superpose({{1.0, antisymmetrize(make_product({ho({0}), ho({1})}))},
                                     {Complex(0.2, -0.9), antisymmetrize(make_product({ho({1}), ho({3})}))}})},
        {"anyon_pair nu=1/2", make_anyon_pair_state(0.5, 0, 1.0, 1.0)},
        {"anyon_pair nu=1.3 k=1", make_anyon_pair_state(1.3, 1, 0.7, 1.5)},
        {"time_reversed", time_reversed_wave(superpose({{1.0, make_product({ho({0})})}, {1.0, make_product({ho({2})})}}), 0.9)},
    };
    std::mt19937_64 rng(1);
    double worst = 0.0;
    std::string worst_name;
    const double h = 1e-5, t = 0.35;
    for (const auto& [name, psi] : family) {
        for (int i = 0; i < 100;) {
            const auto x = random_non_node(rng, psi, t);
            if (psi.structure() == PilotWave::Structure::anyon_pair) {
                // keep the stencil off the principal-branch cut of the relative angle
                if (std::abs(std::atan2(x(0, 1) - x(1, 1), x(0, 0) - x(1, 0))) > kPi - 1e-3) continue;
            }
            ++i;
            const auto g = gradient(psi, x, t);
            double num = 0.0, den = 0.0;
            for (std::size_t c = 0; c < x.size(); ++c) {
                Configuration p = x, m = x;
                p.coords()[c] += h;
                m.coords()[c] -= h;
                const Complex fd = (evaluate(psi, p, t) - evaluate(psi, m, t)) / (2.0 * h);
                num += std::norm(g[c] - fd);
                den += std::norm(fd);
            }
            const double rel = std::sqrt(num / den);
            if (rel > worst) {
                worst = rel;
                worst_name = name;
            }
        }
    }
    return {worst < 1e-6, fmt("max relative error %.3g (< 1e-6) over 11 states x 100 points", worst) + ", worst " + worst_name};
}

Outcome closed_form_trajectory() {
    const auto psi = make_product({make_gaussian_packet({0.0}, {0.0}, 1.0, 1.0)});
    const auto species = SpeciesTable::uniform(1, 1.0, 0.0, Statistics::distinguishable);
    const GuidanceField field(psi, species);
    IntegratorOptions io;
    io.tol = 1e-9;
    const auto traj = integrate(field, Configuration(1, 1, {1.0}), 0.0, 2.0, io);
    const double x_end = traj.back().x(0, 0);
    const double err = std::abs(x_end - std::sqrt(2.0));
    // fixed-step RK4 on the same field
    double x = 1.0;
    const int steps = 2000;
    const double hs = 2.0 / steps;
    auto v = [&](double xx, double tt) { return field.velocity(Configuration(1, 1, {xx}), tt)[0]; };
    for (int i = 0; i < steps; ++i) {
        const double tt = i * hs;
        const double k1 = v(x, tt), k2 = v(x + 0.5 * hs * k1, tt + 0.5 * hs), k3 = v(x + 0.5 * hs * k2, tt + 0.5 * hs),
                     k4 = v(x + hs * k3, tt + hs);
        x += hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const double rk = std::abs(x - x_end);
    return {err <= 1e-6 && rk <= 1e-6, fmt("|X(2) - sqrt2| = %.3g (<= 1e-6), |X - X_rk4| = %.3g", err, rk)};
}

Outcome exchange_phases() {
    const std::vector<SingleParticleState> orbitals{ho({0, 0}), ho({1, 0}), ho({0, 2})};
    const auto sym = symmetrize(make_product(orbitals));
    const auto anti = antisymmetrize(make_product(orbitals));
    std::mt19937_64 rng(3);
    double worst = 0.0;
    const auto perms = all_permutations(3);
    for (int i = 0; i < 100; ++i) {
        const auto xs = random_non_node(rng, sym, 0.6);
        const auto xa = random_non_node(rng, anti, 0.6);
        for (const auto& p : perms) {
            // relabel by hand: slot p(j) receives particle j
            std::vector<double> ps(xs.size()), pa(xa.size());
            for (std::size_t j = 0; j < 3; ++j) {
                for (std::size_t a = 0; a < 2; ++a) {
                    ps[p(j) * 2 + a] = xs(j, a);
                    pa[p(j) * 2 + a] = xa(j, a);
                }
            }
            int inv = 0;
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = a + 1; b < 3; ++b) inv += p(a) > p(b);
            const double sign = inv % 2 ? -1.0 : 1.0;
            worst = std::max(worst, std::abs(evaluate(sym, Configuration(3, 2, ps), 0.6) / evaluate(sym, xs, 0.6) - 1.0));
            worst = std::max(worst, std::abs(evaluate(anti, Configuration(3, 2, pa), 0.6) / evaluate(anti, xa, 0.6) - sign));
        }
    }
    const auto any = make_anyon_pair_state(0.5, 0, 1.0, 1.0);
    const Configuration x(2, 2, {0.7, -0.1, -0.2, 0.4});
    const Point2 r{0.9, -0.5};
    const Complex ph = exchange_phase(any, x, Permutation::transposition(2, 0, 1), 0.0, semicircle_exchange_path(r));
    const double dev = std::abs(ph - Complex(0.0, 1.0));
    return {worst <= 1e-12 && dev <= 1e-8,
            fmt("boson/fermion max |ratio -/+ 1| = %.3g (<= 1e-12); anyon |phase - i| = %.3g (<= 1e-8)", worst, dev)};
}

Outcome coincidence_stationarity() {
    const std::vector<std::pair<PilotWave, Statistics>> states{
        {superpose({{1.0, symmetrize(make_product({ho({0}), ho({1})}))},
                    {Complex(0.6, 0.8), symmetrize(make_product({ho({1}), ho({2})}))}}),
         Statistics::boson},
        {superpose({{1.0, antisymmetrize(make_product({ho({0}), ho({1})}))},
                    {Complex(0.0, 1.0), antisymmetrize(make_product({ho({1}), ho({2})}))}}),
         Statistics::fermion},
        {superpose({{1.0, symmetrize(make_product({ho({0, 0}), ho({1, 0})}))},
                    {Complex(0.0, 1.0), symmetrize(make_product({ho({0, 1}), ho({1, 0})}))},
                    {0.5, symmetrize(make_product({ho({0, 0}), ho({0, 2})}))}}),
         Statistics::boson},
    };
    const std::vector<double> seps{1e-2, 1e-3, 1e-4};
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 0.8);
    bool monotone = true;
    double c_max = 0.0, c_ratio = 0.0;
    for (const auto& [psi, stats] : states) {
        const GuidanceField field(psi, SpeciesTable::uniform(2, 1.0, 0.0, stats));
        const std::size_t d = psi.dim();
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> centre(d), dir(d);
            double n2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                centre[a] = normal(rng);
                dir[a] = normal(rng);
                n2 += dir[a] * dir[a];
            }
            std::vector<double> speed;
            for (double r : seps) {
                std::vector<double> c(2 * d);
                for (std::size_t a = 0; a < d; ++a) {
                    c[a] = centre[a] + 0.5 * r * dir[a] / std::sqrt(n2);
                    c[d + a] = centre[a] - 0.5 * r * dir[a] / std::sqrt(n2);
                }
                const auto v = field.velocity(Configuration(2, d, c), 0.4);
                double s = 0.0;
                for (std::size_t a = 0; a < d; ++a) s += (v[a] - v[d + a]) * (v[a] - v[d + a]);
                speed.push_back(std::sqrt(s));
            }
            for (std::size_t i = 1; i < speed.size(); ++i) monotone = monotone && speed[i] < speed[i - 1];
            // fit |v_rel| <= c r with c taken from the widest separation
            const double c = 1.05 * speed[0] / seps[0];
            for (std::size_t i = 0; i < speed.size(); ++i) c_ratio = std::max(c_ratio, speed[i] / (c * seps[i]));
            c_max = std::max(c_max, c);
        }
    }
    return {monotone && c_ratio <= 1.0,
            std::string(monotone ? "monotone" : "NOT monotone") +
                fmt(", max |v_rel| / (c r) = %.4g (<= 1), largest c = %.3g", c_ratio, c_max)};
}

Outcome non_crossing() {
    std::size_t reached = 0, total = 0;
    double closest = std::numeric_limits<double>::infinity();
    for (const std::string name : {"fermion_noncross", "boson_noncross"}) {
        const auto s = bundled_with_count(name, 1000);
        const auto starts = ex::initial_configurations(s);
        const GuidanceField field(s.psi, s.species, s.potential);
        EnsembleOptions eo;
        eo.integrator.tol = 1e-9;
        eo.integrator.cadence = 100;
        eo.threads = threads();
        eo.keep_full = starts.size();
        const auto res = propagate_ensemble(field, starts, 0.0, 5.0, eo);
        for (const auto& t : res.trajectories) {
            ++total;
            double m = t.meta.min_pair_distance;
            for (const auto& smp : t.samples) m = std::min(m, pair_distance_oracle(smp.x, 0, 1));
            closest = std::min(closest, m);
            if (m <= 1e-8 || t.meta.termination != Termination::completed) ++reached;
        }
    }
    return {reached == 0 && total == 2000,
            fmt("%.0f of %.0f trajectories reached 1e-8; closest approach %.3g", double(reached), double(total), closest)};
}

Outcome coincident_bosons() {
    const auto s = bundled("boson_coincident_forever");
    auto starts = s.initial.configurations;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal(0.0, 0.7);
    for (int i = 0; i < 17; ++i) {
        const double x = normal(rng), y = normal(rng);
        starts.push_back(Configuration(2, 2, {x, y, x, y}));
    }
    const GuidanceField field(s.psi, s.species, s.potential);
    IntegratorOptions io;
    io.tol = 1e-9;
    io.cadence = 100;
    double spread = 0.0;
    std::size_t aborted = 0;
    for (const auto& x0 : starts) {
        const auto t = integrate(field, x0, 0.0, 5.0, io);
        if (t.meta.termination != Termination::completed) ++aborted;
        for (const auto& smp : t.samples) spread = std::max(spread, pair_distance_oracle(smp.x, 0, 1));
    }
    return {spread <= 1e-9 && aborted == 0,
            fmt("max pair distance along %.0f diagonal starts over [0,5]: %.3g (<= 1e-9)", double(starts.size()), spread)};
}

Outcome permutation_equivariance() {
    const auto s = bundled("permutation_equivariance");
    const auto starts = ex::initial_configurations(s);
    const GuidanceField field(s.psi, s.species, s.potential);
    IntegratorOptions io;
    io.tol = s.tolerance;
    io.cadence = s.cadence;
    double worst = 0.0;
    const auto perms = all_permutations(3);
    std::vector<double> per(starts.size(), 0.0);
    parallel_for(starts.size(), threads(), [&](std::size_t i) {
        const auto base = integrate(field, starts[i], s.t0, s.t1, io);
        for (const auto& p : perms) {
            std::vector<double> c(starts[i].size());
            for (std::size_t j = 0; j < 3; ++j) c[p(j)] = starts[i](j, 0);
            const auto moved = integrate(field, Configuration(3, 1, c), s.t0, s.t1, io);
            const std::size_t n = std::min(base.samples.size(), moved.samples.size());
            for (std::size_t k = 0; k < n; ++k) {
                for (std::size_t j = 0; j < 3; ++j) {
                    per[i] = std::max(per[i], std::abs(moved.samples[k].x(p(j), 0) - base.samples[k].x(j, 0)));
                }
            }
        }
    });
    for (double v : per) worst = std::max(worst, v);

    // distinguishable particles of unequal mass: swapping the starts does not swap the paths
    const auto dc = bundled("distinguishable_cross");
    const GuidanceField dfield(dc.psi, dc.species, dc.potential);
    IntegratorOptions dio;
    dio.tol = dc.tolerance;
    dio.cadence = dc.cadence;
    const auto& x0 = dc.initial.configurations.front();
    const auto a = integrate(dfield, x0, dc.t0, dc.t1, dio);
    const auto b = integrate(dfield, Configuration(2, 1, {x0(1, 0), x0(0, 0)}), dc.t0, dc.t1, dio);
    double mismatch = 0.0;
    bool crossed = false;
    for (std::size_t k = 0; k < std::min(a.samples.size(), b.samples.size()); ++k) {
        if (a.samples[k].t <= 1.0 + 1e-12) {
            mismatch = std::max({mismatch, std::abs(b.samples[k].x(1, 0) - a.samples[k].x(0, 0)),
                                 std::abs(b.samples[k].x(0, 0) - a.samples[k].x(1, 0))});
        }
        if (k > 0) {
            const double before = a.samples[k - 1].x(0, 0) - a.samples[k - 1].x(1, 0);
            const double after = a.samples[k].x(0, 0) - a.samples[k].x(1, 0);
            crossed = crossed || (before < 0) != (after < 0);
        }
    }
    const double tol = 10.0 * s.tolerance;
    return {worst <= tol && mismatch > 1e-2 && crossed,
            fmt("identical bosons: max mismatch %.3g (<= %.0e); ", worst, tol) +
                fmt("distinguishable_cross: mismatch by t=1 %.3g (> 1e-2), ", mismatch) +
                (crossed ? "crossing detected" : "NO crossing")};
}

Outcome equivariance() {
    const auto s = bundled_with_count("equivariance_superposition", 100000);
    const auto starts = ex::initial_configurations(s);
    const GuidanceField field(s.psi, s.species, s.potential);
    EnsembleOptions eo;
    eo.integrator.tol = s.tolerance;
    eo.threads = threads();
    eo.keep_full = 0;
    eo.binning = s.binning;
    const auto res = propagate_ensemble(field, starts, s.t0, s.t1, eo);
    // |psi(x, pi)|^2 = (phi0 - phi1)^2 / 2 for the equal beat state
    auto density = [](double x) {
        const double g = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
        const double d = g - std::sqrt(2.0) * x * g;
        return 0.5 * d * d;
    };
    const double lo = -5.0, hi = 5.0;
    const std::size_t bins = 25;
    const double w = (hi - lo) / double(bins);
    std::vector<double> expected(bins), counts(bins, 0.0);
    double inside = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double a = lo + w * double(b);
        const int n = 200;
        double sum = density(a) + density(a + w);
        for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * density(a + w * i / n);
        expected[b] = sum * w / (3.0 * n);
        inside += expected[b];
    }
    double outside = 0.0;
    for (const auto& t : res.trajectories) {
        const double x = t.back().x(0, 0);
        if (x < lo || x >= hi) {
            outside += 1.0;
        } else {
            counts[std::size_t((x - lo) / w)] += 1.0;
        }
    }
    const double n = double(res.trajectories.size());
    double l1 = std::abs(outside / n - (1.0 - inside));
    double var = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        l1 += std::abs(counts[b] / n - expected[b]);
        var += expected[b] * (1.0 - expected[b]);
    }
    // expected L1 of a perfect |psi|^2 sample: sum sqrt(2 p (1 - p) / (pi n))
    double floor = 0.0;
    for (double p : expected) floor += std::sqrt(2.0 * p * (1.0 - p) / (kPi * n));
    const double lib = res.report.density_distance.back().value;
    return {l1 < 0.05 && res.report.node_aborts == 0,
            fmt("L1 at t=pi %.4g (< 0.05), sampling floor %.3g, library report %.4g", l1, floor, lib)};
}

Outcome gauge_invariance() {
    std::mt19937_64 rng(21);
    double worst = 0.0;
    std::size_t points = 0;
    for (const std::string name : {"ab_gauge_invariance", "time_reversal_roundtrip"}) {
        const auto s = bundled(name);
        const GuidanceField base(s.psi, s.species, s.potential);
        const std::size_t d = s.psi.dim();
        std::vector<double> a{0.8, -0.6, 0.3};
        a.resize(d);
        std::vector<ScalarField> gauges{make_constant_field(2.1), make_linear_field(a, 0.4)};
        for (const auto& line : s.potential.flux_lines()) gauges.push_back(make_flux_angle_field(line.flux, line.position));
        for (const auto& chi : gauges) {
            const auto g = gauge_transform(s.psi, s.species, s.potential, chi);
            const GuidanceField moved(g.psi, s.species, g.potential);
            for (int i = 0; i < 100; ++i, ++points) {
                const auto x = random_non_node(rng, s.psi, 0.7, 1.5);
                worst = std::max(worst, max_abs_difference(base.velocity(x, 0.7), moved.velocity(x, 0.7)));
            }
        }
    }
    return {worst <= 1e-10, fmt("max velocity change %.3g (<= 1e-10) over %.0f points, flux-line gauges included", worst,
                                double(points))};
}

Outcome circulation_quantisation() {
    double worst = 0.0;
    const std::size_t m = 4096;
    for (double nu : {0.5, 1.0}) {
        const auto psi = make_anyon_pair_state(nu, 0, 1.0, 1.0);
        const GuidanceField field(psi, SpeciesTable::uniform(2, 1.0, 0.0, Statistics::anyon, nu));
        const double expected = 2.0 * kPi * nu / 0.5;
        for (double r : {0.5, 1.0, 2.0}) {
            // periodic trapezoid rule, offset half a step so no node sits on the branch cut
            double sum = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double th = 2.0 * kPi * (double(i) + 0.5) / double(m);
                const double rx = r * std::cos(th), ry = r * std::sin(th);
                const auto v = field.velocity(Configuration(2, 2, {0.5 * rx, 0.5 * ry, -0.5 * rx, -0.5 * ry}), 0.0);
                sum += (v[0] - v[2]) * (-ry) + (v[1] - v[3]) * rx;
            }
            worst = std::max(worst, std::abs(sum * 2.0 * kPi / double(m) - expected));
        }
    }
    double flux_worst = 0.0;
    for (double flux : {0.7, -1.3, 3.0}) {
        const auto a = make_flux_line(flux, {0.3, -0.2});
        for (double r : {0.5, 1.0, 2.0}) {
            double sum = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double th = 2.0 * kPi * double(i) / double(m);
                const std::vector<double> pos{0.3 + r * std::cos(th), -0.2 + r * std::sin(th)};
                const auto av = a.at(pos);
                sum += av[0] * (-r * std::sin(th)) + av[1] * (r * std::cos(th));
            }
            flux_worst = std::max(flux_worst, std::abs(sum * 2.0 * kPi / double(m) - flux));
        }
    }
    return {worst <= 1e-6 && flux_worst <= 1e-8,
            fmt("anyon |circulation - 2 pi l/mu| = %.3g (<= 1e-6); flux loop |sum - Phi| = %.3g (<= 1e-8)", worst,
                flux_worst)};
}

Outcome time_reversal() {
    double worst_ratio = 0.0;
    std::string worst_name, failures;
    std::size_t tested = 0;
    for (const auto& name : kBundled) {
        const auto s = bundled(name);
        const auto rt = ex::time_reversal_round_trip(s, ex::initial_configurations(s), 20, {}, threads());
        tested += rt.tested;
        const double ratio = rt.max_deviation / (1e3 * s.tolerance);
        if (ratio > 1.0 || rt.tested == 0) failures += " " + name;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_name = name;
        }
    }
    return {failures.empty(), fmt("worst deviation %.3g of the 1e3*tol bound over %.0f round trips", worst_ratio,
                                  double(tested)) +
                                  " (" + worst_name + ")" + (failures.empty() ? "" : "; failed:" + failures)};
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "pilotwave_acceptance_determinism";
    fs::remove_all(root);
    auto snapshot = [](const fs::path& dir) {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (!e.is_regular_file()) continue;
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            files[fs::relative(e.path(), dir).string()] = ss.str();
        }
        return files;
    };
    std::size_t files = 0;
    std::string differs;
    for (const auto& name : kBundled) {
        const auto s = bundled(name);
        ex::RunOptions a;
        a.out_dir = (root / "a").string();
        a.threads = 1;
        ex::RunOptions b = a;
        b.out_dir = (root / "b").string();
        b.threads = threads() > 1 ? threads() : 2;
        ex::run_scenario(s, a);
        ex::run_scenario(s, b);
    }
    const auto fa = snapshot(root / "a"), fb = snapshot(root / "b");
    files = fa.size();
    for (const auto& [k, v] : fa) {
        auto it = fb.find(k);
        if (it == fb.end() || it->second != v) differs += " " + k;
    }
    fs::remove_all(root);
    return {differs.empty() && fa.size() == fb.size() && files > 0,
            fmt("%.0f artifacts from 9 scenarios, single vs multi-threaded runs", double(files)) +
                (differs.empty() ? ": byte-identical" : "; differing:" + differs)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;  ///< runtime bound, 0 = none
    };
    const std::vector<Criterion> criteria{
        {"gradient oracle", gradient_oracle, 10.0},
        {"closed-form Gaussian trajectory", closed_form_trajectory, 1.0},
        {"exchange-phase condition", exchange_phases, 0.0},
        {"coincidence stationarity", coincidence_stationarity, 0.0},
        {"non-crossing", non_crossing, 300.0},
        {"coincident bosons remain coincident", coincident_bosons, 0.0},
        {"permutation equivariance", permutation_equivariance, 0.0},
        {"equivariance of |psi|^2", equivariance, 600.0},
        {"gauge invariance", gauge_invariance, 0.0},
        {"circulation quantisation", circulation_quantisation, 0.0},
        {"time-reversal round trip", time_reversal, 0.0},
        {"determinism", determinism, 0.0},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && secs > c.budget_s) {
            o.passed = false;
            o.detail += fmt("; runtime %.1f s exceeds %.0f s", secs, c.budget_s);
        }
        std::printf("%s [%2zu] %-36s %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.passed ? 0 : 1;
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - std::size_t(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
