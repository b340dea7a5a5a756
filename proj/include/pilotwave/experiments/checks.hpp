// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file checks.hpp
 * @brief Invariant battery behind `pilotwave check`.
 *
 * Each check compares the library against an independent oracle (finite
 * differences, explicit permutation, closed forms) and reports the measured
 * quantity next to its threshold.
 */

#pragma once

#include <pilotwave/pilotwave.hpp>

#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pilotwave::experiments {

struct CheckOptions {
    bool full = false;  ///< full-size ensembles instead of the quick defaults
    std::size_t threads = 1;
    FieldPerturbation perturbation{};
};

struct CheckResult {
    std::string claim;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string comparison;
};

struct CheckEntry {
    std::string name;
    std::function<CheckResult(const CheckOptions&)> run;
};

class CheckRegistry {
public:
    void add(std::string name, std::function<CheckResult(const CheckOptions&)> fn) {
        entries_.push_back({std::move(name), std::move(fn)});
    }
    const std::vector<CheckEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<CheckEntry> entries_;
};

namespace checks {

inline SingleParticleState ho(std::vector<int> levels) { return make_oscillator_eigenstate(levels, 1.0, 1.0); }

inline PilotWave fermion_pair_1d() {
    return superpose({{1.0, antisymmetrize(make_product({ho({0}), ho({1})}))},
                      {Complex(0.0, 1.0), antisymmetrize(make_product({ho({1}), ho({2})}))}});
}

inline PilotWave boson_pair_2d() {
    return superpose({{1.0, symmetrize(make_product({ho({0, 0}), ho({1, 0})}))},
                      {Complex(0.0, 1.0), symmetrize(make_product({ho({0, 1}), ho({1, 0})}))},
                      {0.5, symmetrize(make_product({ho({0, 0}), ho({0, 2})}))}});
}

inline PilotWave boson_pair_1d() {
    return superpose({{1.0, symmetrize(make_product({ho({0}), ho({1})}))},
                      {Complex(0.6, 0.8), symmetrize(make_product({ho({1}), ho({2})}))}});
}

inline PilotWave beat_state() { return superpose({{1.0, make_product({ho({0})})}, {1.0, make_product({ho({1})})}}); }

inline Configuration random_point(std::mt19937_64& rng, const PilotWave& psi, double t, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    while (true) {
        std::vector<double> c(psi.particles() * psi.dim());
        for (auto& v : c) v = normal(rng);
        Configuration x(psi.particles(), psi.dim(), std::move(c));
        if (std::abs(evaluate(psi, x, t)) > 1e-6 * psi.peak()) return x;
    }
}

inline double fd_relative_error(const PilotWave& psi, const Configuration& x, double t, double h) {
    const auto g = gradient(psi, x, t);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Configuration plus = x, minus = x;
        plus.coords()[i] += h;
        minus.coords()[i] -= h;
        const Complex fd = (evaluate(psi, plus, t) - evaluate(psi, minus, t)) / (2.0 * h);
        num += std::norm(g[i] - fd);
        den += std::norm(fd);
    }
    return std::sqrt(num / den);
}

inline CheckResult gradients(const CheckOptions& o) {
    const std::vector<PilotWave> family{
        make_product({make_gaussian_packet({0.2}, {1.3}, 0.9, 1.5)}),
        make_product({make_gaussian_packet({0.2, -0.4, 0.1}, {0.3, -0.7, 1.0}, 1.1, 0.8)}),
        make_product({make_oscillator_eigenstate({3}, 1.2, 0.7)}),
        make_product({ho({1, 2}), make_gaussian_packet({0.5, 0.0}, {0.0, 1.0}, 1.0)}),
        symmetrize(make_product({ho({0}), ho({1}), ho({2})})),
        antisymmetrize(make_product({ho({0, 0}), ho({1, 0})})),
        superpose({{1.0, make_product({ho({0})})}, {Complex(0.3, 0.8), make_product({ho({1})})}}),
        make_anyon_pair_state(0.5, 0, 1.0, 1.0),
        make_anyon_pair_state(1.5, -1, 0.8, 1.2),
        time_reversed_wave(make_product({make_gaussian_packet({0.0}, {1.0}, 1.0)}), 0.7),
    };
    const int points = o.full ? 100 : 25;
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (const auto& psi : family) {
        for (int i = 0; i < points;) {
            const auto x = random_point(rng, psi, 0.4);
            if (psi.structure() == PilotWave::Structure::anyon_pair) {
                const double phi = std::atan2(x(0, 1) - x(1, 1), x(0, 0) - x(1, 0));
                if (std::abs(phi) > kPi - 1e-3) continue;  // stencil would straddle the branch cut
            }
            worst = std::max(worst, fd_relative_error(psi, x, 0.4, 1e-5));
            ++i;
        }
    }
    return {"analytic gradients match finite differences", worst < 1e-6, worst, 1e-6, "<"};
}

inline CheckResult exchange_phases(const CheckOptions&) {
    const std::vector<SingleParticleState> orbitals{ho({0}), ho({1}), ho({3})};
    const auto sym = symmetrize(make_product(orbitals));
    const auto anti = antisymmetrize(make_product(orbitals));
    const auto perms = all_permutations(3);
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto xs = random_point(rng, sym, 0.2);
        const auto xa = random_point(rng, anti, 0.2);
        for (const auto& p : perms) {
            worst = std::max(worst, std::abs(exchange_phase(sym, xs, p, 0.2) - 1.0));
            worst = std::max(worst, std::abs(exchange_phase(anti, xa, p, 0.2) - double(p.parity())));
        }
    }
    return {"boson/fermion exchange phases are +1/-1", worst <= 1e-12, worst, 1e-12, "<="};
}

inline CheckResult anyon_exchange(const CheckOptions&) {
    const auto psi = make_anyon_pair_state(0.5, 0, 1.0, 1.0);
    const Configuration x(2, 2, {0.6, 0.2, -0.4, 0.1});
    const Point2 r{x(0, 0) - x(1, 0), x(0, 1) - x(1, 1)};
    const Complex ph = exchange_phase(psi, x, Permutation::transposition(2, 0, 1), 0.0, semicircle_exchange_path(r));
    const double dev = std::abs(ph - std::polar(1.0, kPi / 2.0));
    return {"anyon nu=1/2 counterclockwise exchange phase is e^{i pi/2}", dev <= 1e-8, dev, 1e-8, "<="};
}

inline CheckResult coincidence_stationarity(const CheckOptions& o) {
    const std::vector<PilotWave> states{fermion_pair_1d(), boson_pair_1d(), boson_pair_2d()};
    const std::vector<double> seps{1e-2, 1e-3, 1e-4};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 0.7);
    double worst = 0.0;
    bool monotone = true;
    for (const auto& psi : states) {
        const auto species = SpeciesTable::uniform(2, 1.0, 0.0,
                                                   psi.symmetry().kind == SymmetryKind::antisymmetric ? Statistics::fermion
                                                                                                      : Statistics::boson);
        const GuidanceField field(psi, species, {}, o.perturbation);
        const std::size_t d = psi.dim();
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> centre(d), dir(d);
            double norm = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                centre[a] = normal(rng);
                dir[a] = normal(rng);
                norm += dir[a] * dir[a];
            }
            for (auto& v : dir) v /= std::sqrt(norm);
            std::vector<double> speeds;
            for (double r : seps) {
                std::vector<double> c(2 * d);
                for (std::size_t a = 0; a < d; ++a) {
                    c[a] = centre[a] + 0.5 * r * dir[a];
                    c[d + a] = centre[a] - 0.5 * r * dir[a];
                }
                const auto v = field.velocity(Configuration(2, d, c), 0.3);
                double s = 0.0;
                for (std::size_t a = 0; a < d; ++a) s += (v[a] - v[d + a]) * (v[a] - v[d + a]);
                speeds.push_back(std::sqrt(s));
            }
            const double c0 = speeds[0] / seps[0];
            for (std::size_t i = 0; i < seps.size(); ++i) {
                if (i > 0 && !(speeds[i] < speeds[i - 1])) monotone = false;
                worst = std::max(worst, speeds[i] / seps[i] / c0);
            }
        }
    }
    if (!monotone) worst = std::numeric_limits<double>::infinity();
    return {"relative speed vanishes linearly at coincidence (|v_rel|/r over its value at r=1e-2)", worst <= 2.0, worst,
            2.0, "<="};
}

inline CheckResult gauge_invariance(const CheckOptions& o) {
    const auto psi = superpose({{1.0, make_product({make_gaussian_packet({-1.0, 0.5}, {1.2, 0.0}, 1.0)})},
                                {Complex(0.0, 0.7), make_product({ho({1, 0})})}});
    const auto species = SpeciesTable::uniform(1, 1.0, 1.0, Statistics::distinguishable);
    const auto a = make_flux_line(0.7, {0.1, -0.2});
    auto g = gauge_transform(psi, species, a, make_linear_field({0.9, -0.4}, 0.3));
    g = gauge_transform(g.psi, species, g.potential, make_flux_angle_field(0.7, {0.1, -0.2}));
    const GuidanceField f1(psi, species, a, o.perturbation);
    const GuidanceField f2(g.psi, species, g.potential, o.perturbation);
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto x = random_point(rng, psi, 0.5, 1.5);
        worst = std::max(worst, max_abs_difference(f1.velocity(x, 0.5), f2.velocity(x, 0.5)));
    }
    return {"velocity field is gauge invariant (flux line included)", worst <= 1e-10, worst, 1e-10, "<="};
}

inline CheckResult permutation_equivariance(const CheckOptions& o) {
    const auto psi = boson_pair_2d();
    const GuidanceField field(psi, SpeciesTable::uniform(2, 1.0, 0.0, Statistics::boson), {}, o.perturbation);
    const auto starts = sample_initial(psi, 0.0, o.full ? 20 : 5, 13);
    const auto p = Permutation::transposition(2, 0, 1);
    IntegratorOptions io;
    io.tol = 1e-9;
    std::vector<double> mismatch(starts.size());
    parallel_for(starts.size(), o.threads, [&](std::size_t i) {
        const auto a = integrate(field, starts[i], 0.0, 2.0, io);
        const auto b = integrate(field, apply(p, starts[i]), 0.0, 2.0, io);
        mismatch[i] = trajectory_mismatch(permute_trajectory(p, a), b);
    });
    const double worst = *std::max_element(mismatch.begin(), mismatch.end());
    return {"trajectories are permutation equivariant", worst <= 10.0 * io.tol, worst, 10.0 * io.tol, "<="};
}

inline CheckResult density_equivariance(const CheckOptions& o) {
    const auto psi = beat_state();
    const GuidanceField field(psi, SpeciesTable::uniform(1, 1.0, 0.0, Statistics::distinguishable), {}, o.perturbation);
    const std::size_t n = o.full ? 100000 : 20000;
    const auto xs = sample_initial(psi, 0.0, n, 11);
    EnsembleOptions eo;
    eo.threads = o.threads;
    eo.binning = Binning{};
    eo.binning->axes.assign(1, AxisBins{-5.0, 5.0, o.full ? std::size_t(50) : std::size_t(25)});
    const auto res = propagate_ensemble(field, xs, 0.0, kPi, eo);
    const auto& dd = res.report.density_distance;
    const double v = dd.size() == 2 ? dd[1].value : std::numeric_limits<double>::infinity();
    return {"|psi|^2 density is preserved by the flow (L1 at t=pi)", v < 0.05, v, 0.05, "<"};
}

inline CheckResult non_crossing(const CheckOptions& o) {
    const std::size_t n = o.full ? 1000 : 100;
    double worst = std::numeric_limits<double>::infinity();
    const std::vector<std::pair<PilotWave, Statistics>> cases{{fermion_pair_1d(), Statistics::fermion},
                                                              {boson_pair_2d(), Statistics::boson}};
    for (const auto& [psi, stats] : cases) {
        const GuidanceField field(psi, SpeciesTable::uniform(2, 1.0, 0.0, stats), {}, o.perturbation);
        const auto xs = sample_initial(psi, 0.0, n, 21);
        EnsembleOptions eo;
        eo.threads = o.threads;
        eo.keep_full = 0;
        const auto res = propagate_ensemble(field, xs, 0.0, 5.0, eo);
        for (const auto& t : res.trajectories) worst = std::min(worst, t.meta.min_pair_distance);
    }
    return {"identical particles never reach coincidence", worst > 1e-8, worst, 1e-8, ">"};
}

inline CheckResult coincidence_persistence(const CheckOptions& o) {
    const auto psi = boson_pair_2d();
    const GuidanceField field(psi, SpeciesTable::uniform(2, 1.0, 0.0, Statistics::boson), {}, o.perturbation);
    double worst = 0.0;
    for (const auto& c : std::vector<std::vector<double>>{{0.3, -0.2}, {-0.5, 0.1}, {-0.6, 0.6}}) {
        const auto t = integrate(field, Configuration::from_positions({c, c}), 0.0, 5.0);
        worst = std::max(worst, t.meta.max_coincident_spread);
    }
    return {"coincident bosons remain coincident", worst <= 1e-9, worst, 1e-9, "<="};
}

inline CheckResult time_reversal(const CheckOptions& o) {
    const auto psi = fermion_pair_1d();
    const auto species = SpeciesTable::uniform(2, 1.0, 0.0, Statistics::fermion);
    const GuidanceField fwd(psi, species, {}, o.perturbation);
    const GuidanceField back(time_reversed_wave(psi, 2.0), species, {}, o.perturbation);
    const auto starts = sample_initial(psi, 0.0, o.full ? 20 : 5, 17);
    IntegratorOptions io;
    io.tol = 1e-9;
    io.keep_samples = false;
    std::vector<double> dev(starts.size());
    parallel_for(starts.size(), o.threads, [&](std::size_t i) {
        const auto a = integrate(fwd, starts[i], 0.0, 2.0, io);
        const auto b = integrate(back, a.back().x, 2.0, 4.0, io);
        dev[i] = max_abs_difference(b.back().x.coords(), starts[i].coords());
    });
    const double worst = *std::max_element(dev.begin(), dev.end());
    return {"time-reversed flow retraces trajectories", worst <= 1e3 * io.tol, worst, 1e3 * io.tol, "<="};
}

inline CheckResult circulation_quantisation(const CheckOptions& o) {
    double worst = 0.0;
    for (double nu : {0.5, 1.0}) {
        const auto psi = make_anyon_pair_state(nu, 0, 1.0, 1.0);
        const GuidanceField field(psi, SpeciesTable::uniform(2, 1.0, 0.0, Statistics::anyon, nu), {}, o.perturbation);
        const double expected = 2.0 * kPi * nu / 0.5;
        for (double r : {0.5, 1.0, 2.0}) {
            worst = std::max(worst, std::abs(circulation(field, circle_loop({0.0, 0.0}, r), 0.0) - expected));
        }
    }
    return {"anyon relative circulation is 2 pi l / mu", worst <= 1e-6, worst, 1e-6, "<="};
}

inline CheckResult flux_loop(const CheckOptions&) {
    double worst = 0.0;
    for (double flux : {0.3, -1.7, 2.5}) {
        const auto a = make_flux_line(flux, {0.4, -0.3});
        for (double r : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(loop_integral(a, circle_loop({0.4, -0.3}, r)) - flux));
    }
    return {"flux-line loop integral equals the enclosed flux", worst <= 1e-8, worst, 1e-8, "<="};
}

}  // namespace checks

inline CheckRegistry default_check_registry() {
    CheckRegistry r;
    r.add("gradients", checks::gradients);
    r.add("exchange_phases", checks::exchange_phases);
    r.add("anyon_exchange", checks::anyon_exchange);
    r.add("coincidence_stationarity", checks::coincidence_stationarity);
    r.add("gauge_invariance", checks::gauge_invariance);
    r.add("permutation_equivariance", checks::permutation_equivariance);
    r.add("density_equivariance", checks::density_equivariance);
    r.add("non_crossing", checks::non_crossing);
    r.add("coincidence_persistence", checks::coincidence_persistence);
    r.add("time_reversal", checks::time_reversal);
    r.add("circulation", checks::circulation_quantisation);
    r.add("flux_loop", checks::flux_loop);
    return r;
}

struct CheckRow {
    std::string name;
    CheckResult result;
    std::string error;  ///< set when the check threw
};

struct CheckReport {
    std::vector<CheckRow> rows;
    bool passed() const {
        for (const auto& r : rows) {
            if (!r.result.passed) return false;
        }
        return true;
    }
};

/// Runs every registered check; a check that throws counts as failed.
inline CheckReport check_suite(const CheckRegistry& registry, const CheckOptions& opts = {}) {
    if (registry.empty()) throw ConfigurationError("check suite: no checks registered");
    CheckReport rep;
    for (const auto& e : registry.entries()) {
        CheckRow row{e.name, {}, {}};
        try {
            row.result = e.run(opts);
        } catch (const std::exception& ex) {
            row.result.claim = e.name;
            row.result.passed = false;
            row.error = ex.what();
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline std::string format_check_table(const CheckReport& rep) {
    std::ostringstream os;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-26s %-6s %-14s %-3s %-10s %s\n", "check", "status", "measured", "", "threshold",
                  "claim");
    os << buf;
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof buf, "%-26s %-6s %-14.6g %-3s %-10.3g %s\n", r.name.c_str(),
                      r.result.passed ? "PASS" : "FAIL", r.result.measured, r.result.comparison.c_str(),
                      r.result.threshold, r.result.claim.c_str());
        os << buf;
        if (!r.error.empty()) os << "    error: " << r.error << "\n";
    }
    return os.str();
}

}  // namespace pilotwave::experiments
