// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file runner.hpp
 * @brief Executes a validated scenario: propagation, monitors and artifacts.
 *
 * Artifacts go to <out>/<scenario name>/:
 *   trajectory_NNNN.csv           dense trajectories (all explicit starts, or the first keep_full samples)
 *   trajectory_NNNN_reduced.csv   canonicalised copies when outputs.reduced is set
 *   trajectory_NNNN_t.svg         coordinate against time (first four trajectories)
 *   trajectory_NNNN_plan.svg      planar paths for d = 2
 *   report.json                   ensemble report
 *   monitors.json                 monitor outcomes and the list of failures
 */

#pragma once

#include <pilotwave/experiments/scenario.hpp>
#include <pilotwave/experiments/svg.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pilotwave::experiments {

struct MonitorResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string comparison;  ///< how measured relates to threshold on success, e.g. "<="
    Json details = Json::object();
};

inline nlohmann::ordered_json to_json(const MonitorResult& m) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["passed"] = m.passed;
    j["measured"] = m.measured;
    j["comparison"] = m.comparison;
    j["threshold"] = m.threshold;
    j["details"] = m.details;
    return j;
}

struct RunOptions {
    std::size_t threads = 1;
    std::optional<std::string> out_dir;  ///< no files are written when empty
    std::optional<std::uint64_t> seed;   ///< replaces the scenario seed in sampled mode
    FieldPerturbation perturbation{};    ///< test hook
};

struct RunResult {
    int exit_code = 0;
    std::vector<MonitorResult> monitors;
    EnsembleReport report;
    std::vector<Trajectory> trajectories;
    std::vector<std::string> artifacts;

    bool passed() const { return exit_code == 0; }
    std::vector<std::string> failures() const {
        std::vector<std::string> f;
        for (const auto& m : monitors) {
            if (!m.passed) f.push_back(m.name);
        }
        return f;
    }
};

namespace detail {

inline double param(const MonitorSpec& m, const char* key, double fallback) {
    if (!m.params.contains(key)) return fallback;
    const auto& v = m.params[key];
    if (!v.is_number() || !std::isfinite(v.get<double>())) throw ValidationError(child(m.pointer, key), "expected a number");
    return v.get<double>();
}

inline std::size_t count_param(const MonitorSpec& m, const char* key, std::size_t fallback) {
    if (!m.params.contains(key)) return fallback;
    const auto& v = m.params[key];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw ValidationError(child(m.pointer, key), "expected a positive integer");
    }
    return std::size_t(v.get<std::int64_t>());
}

inline Permutation monitor_permutation(const MonitorSpec& m, std::size_t n) {
    if (!m.params.contains("permutation")) return Permutation::transposition(n, 0, 1);
    const auto& v = m.params["permutation"];
    const std::string p = child(m.pointer, "permutation");
    if (!v.is_array() || v.size() != n) throw ValidationError(p, "expected " + std::to_string(n) + " one-based images");
    std::vector<std::size_t> img;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) throw ValidationError(child(p, i), "expected an integer");
        img.push_back(std::size_t(v[i].get<std::int64_t>()));
    }
    try {
        return Permutation::from_images(img);
    } catch (const ParameterError& e) {
        throw ValidationError(p, e.what());
    }
}

inline std::vector<ScalarField> gauge_fields(const MonitorSpec& m, std::size_t dim) {
    std::vector<ScalarField> out;
    if (!m.params.contains("chi")) {
        std::vector<double> a{0.7, -0.3, 0.4};
        a.resize(dim);
        out.push_back(make_linear_field(a, 0.2));
        return out;
    }
    const auto& v = m.params["chi"];
    const std::string p = child(m.pointer, "chi");
    if (v.is_object()) {
        out.push_back(parse_scalar_field(v, p));
    } else if (v.is_array() && !v.empty()) {
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_scalar_field(v[i], child(p, i)));
    } else {
        throw ValidationError(p, "expected a scalar field or a list of them");
    }
    return out;
}

inline bool has_coincident_start(const Scenario& s) {
    for (const auto& x : s.initial.configurations) {
        if (!pilotwave::detail::coincident_groups(x.view()).empty()) return true;
    }
    return false;
}

}  // namespace detail

/// Checks monitor parameters and applicability; throws ValidationError.
inline void validate_monitors(const Scenario& s) {
    using namespace detail;
    const std::size_t n = s.psi.particles();
    for (const auto& m : s.monitors) {
        auto allow = [&](std::initializer_list<const char*> keys) { check_keys(m.params, m.pointer, keys); };
        auto fail = [&](const std::string& why) { throw ValidationError(m.pointer, m.type + ": " + why); };
        if (m.type == "min_distance") {
            allow({"threshold"});
            if (n < 2) fail("needs at least two particles");
            param(m, "threshold", kCoincidenceThreshold);
        } else if (m.type == "coincidence_persistence") {
            allow({"tolerance"});
            if (!has_coincident_start(s)) fail("needs an explicit start with exactly coincident particles");
            param(m, "tolerance", 1e-9);
        } else if (m.type == "permutation_equivariance") {
            allow({"permutation", "expect", "tolerance", "threshold", "until", "max_trajectories"});
            if (n < 2) fail("needs at least two particles");
            monitor_permutation(m, n);
            if (m.params.contains("expect")) {
                const auto& e = m.params["expect"];
                if (!e.is_string() || (e != "hold" && e != "violated")) {
                    throw ValidationError(child(m.pointer, "expect"), "must be 'hold' or 'violated'");
                }
            }
            param(m, "tolerance", 0.0);
            param(m, "threshold", 0.0);
            param(m, "until", 0.0);
            count_param(m, "max_trajectories", 1);
        } else if (m.type == "crossing") {
            allow({"expect"});
            if (n < 2) fail("needs at least two particles");
            if (!m.params.contains("expect") || !m.params["expect"].is_boolean()) {
                throw ValidationError(child(m.pointer, "expect"), "required boolean");
            }
        } else if (m.type == "time_reversal") {
            allow({"tolerance", "max_trajectories"});
            param(m, "tolerance", 0.0);
            count_param(m, "max_trajectories", 1);
        } else if (m.type == "circulation") {
            allow({"radii", "tolerance", "time", "center"});
            if (!s.psi.anyon_params()) fail("needs an anyon_pair state");
            for (std::size_t k = 0; k < n; ++k) {
                if (s.species.charge(k) != 0.0 && !s.potential.is_zero()) fail("needs neutral particles or no potential");
            }
            if (m.params.contains("radii")) vector_field(m.params, m.pointer, "radii");
            if (m.params.contains("center")) {
                if (vector_field(m.params, m.pointer, "center").size() != 2) fail("center must be planar");
            }
            param(m, "tolerance", 1e-6);
            param(m, "time", 0.0);
        } else if (m.type == "flux_loop") {
            allow({"radius", "tolerance"});
            if (s.potential.flux_lines().empty()) fail("needs at least one flux line");
            if (!(param(m, "radius", 1.0) > 0.0)) fail("radius must be positive");
            param(m, "tolerance", 1e-8);
        } else if (m.type == "gauge_invariance") {
            allow({"chi", "points", "seed", "tolerance"});
            gauge_fields(m, s.psi.dim());
            count_param(m, "points", 1);
            param(m, "seed", 0.0);
            param(m, "tolerance", 1e-10);
        } else if (m.type == "equivariance") {
            allow({"tolerance", "drift"});
            if (!s.binning) fail("needs a top-level binning");
            if (s.initial.mode != InitialMode::sampled) fail("needs sampled initial conditions");
            param(m, "tolerance", 0.05);
            param(m, "drift", 0.03);
        } else if (m.type == "node_aborts") {
            allow({"max"});
            param(m, "max", 0.0);
        }
    }
}

/// Starting configurations: the explicit list, or |psi|^2 samples at t0.
inline std::vector<Configuration> initial_configurations(const Scenario& s, std::optional<std::uint64_t> seed = {}) {
    if (s.initial.mode == InitialMode::explicit_list) return s.initial.configurations;
    return sample_initial(s.psi, s.t0, s.initial.count, seed.value_or(s.initial.seed));
}

struct RoundTrip {
    double max_deviation = 0.0;
    std::size_t tested = 0;
    std::size_t skipped = 0;  ///< runs that hit a node or underflowed
};

/**
 * Integrates the first `count` starts over [t0, t1], then follows the
 * time-reversed wave (pivot t1, A negated) for the same duration and compares
 * the result with the start.
 */
inline RoundTrip time_reversal_round_trip(const Scenario& s, const std::vector<Configuration>& starts, std::size_t count,
                                          const FieldPerturbation& perturbation = {}, std::size_t threads = 1) {
    count = std::min(count, starts.size());
    const GuidanceField fwd(s.psi, s.species, s.potential, perturbation);
    const GuidanceField back(time_reversed_wave(s.psi, s.t1), s.species, s.potential.negated(), perturbation);
    IntegratorOptions io;
    io.tol = s.tolerance;
    io.cadence = s.cadence;
    io.collapse_coincident = s.collapse_coincident;
    io.keep_samples = false;
    std::vector<double> dev(count, -1.0);
    parallel_for(count, threads, [&](std::size_t i) {
        try {
            const auto a = integrate(fwd, starts[i], s.t0, s.t1, io);
            if (a.meta.termination != Termination::completed) return;
            const auto b = integrate(back, a.back().x, s.t1, 2.0 * s.t1 - s.t0, io);
            if (b.meta.termination != Termination::completed) return;
            dev[i] = max_abs_difference(b.back().x.coords(), starts[i].coords());
        } catch (const NodeError&) {
        }
    });
    RoundTrip rt;
    for (double d : dev) {
        if (d < 0) {
            ++rt.skipped;
        } else {
            ++rt.tested;
            rt.max_deviation = std::max(rt.max_deviation, d);
        }
    }
    return rt;
}

namespace detail {

struct RunContext {
    const Scenario& s;
    const RunOptions& opts;
    const GuidanceField& field;
    const std::vector<Configuration>& starts;
    const EnsembleResult& ensemble;
    std::size_t kept;
};

inline IntegratorOptions integrator_options(const Scenario& s) {
    IntegratorOptions io;
    io.tol = s.tolerance;
    io.cadence = s.cadence;
    io.collapse_coincident = s.collapse_coincident;
    return io;
}

inline MonitorResult monitor_min_distance(const RunContext& c, const MonitorSpec& m) {
    const double threshold = param(m, "threshold", kCoincidenceThreshold);
    double best = std::numeric_limits<double>::infinity();
    double when = c.s.t0;
    std::size_t index = 0;
    std::size_t below = 0;
    for (std::size_t i = 0; i < c.ensemble.trajectories.size(); ++i) {
        const auto& t = c.ensemble.trajectories[i];
        double d = t.meta.min_pair_distance;
        double at = t.meta.min_pair_time;
        if (i < c.kept && t.samples.size() > 1) {
            const auto refined = min_distance_monitor(t);
            if (refined.distance < d) {
                d = refined.distance;
                at = refined.time;
            }
        }
        if (!(d > threshold)) ++below;
        if (d < best) {
            best = d;
            when = at;
            index = i;
        }
    }
    MonitorResult r{"min_distance", below == 0, best, threshold, ">", Json::object()};
    r.details = {{"time", when}, {"trajectory", index}, {"trajectories_below", below}};
    return r;
}

inline MonitorResult monitor_coincidence(const RunContext& c, const MonitorSpec& m) {
    const double tol = param(m, "tolerance", 1e-9);
    double spread = 0.0;
    std::size_t tested = 0;
    for (std::size_t i = 0; i < c.starts.size(); ++i) {
        if (pilotwave::detail::coincident_groups(c.starts[i].view()).empty()) continue;
        ++tested;
        spread = std::max(spread, c.ensemble.trajectories[i].meta.max_coincident_spread);
    }
    MonitorResult r{"coincidence_persistence", spread <= tol, spread, tol, "<=", Json::object()};
    r.details = {{"trajectories", tested}};
    return r;
}

inline MonitorResult monitor_permutation(const RunContext& c, const MonitorSpec& m) {
    const auto p = monitor_permutation(m, c.s.psi.particles());
    const bool expect_hold = !m.params.contains("expect") || m.params["expect"] == "hold";
    const std::size_t count = std::min(c.starts.size(), count_param(m, "max_trajectories", 20));
    auto io = integrator_options(c.s);
    std::vector<double> mismatch(count, 0.0);
    const double until = param(m, "until", 1.0);
    parallel_for(count, c.opts.threads, [&](std::size_t i) {
        const auto a = integrate(c.field, c.starts[i], c.s.t0, c.s.t1, io);
        const auto b = integrate(c.field, apply(p, c.starts[i]), c.s.t0, c.s.t1, io);
        mismatch[i] = expect_hold ? trajectory_mismatch(permute_trajectory(p, a), b)
                                  : trajectory_mismatch(permute_trajectory(p, a), b, until);
    });
    MonitorResult r;
    r.name = "permutation_equivariance";
    if (expect_hold) {
        r.threshold = param(m, "tolerance", 10.0 * c.s.tolerance);
        r.measured = count ? *std::max_element(mismatch.begin(), mismatch.end()) : 0.0;
        r.comparison = "<=";
        r.passed = r.measured <= r.threshold;
    } else {
        r.threshold = param(m, "threshold", 1e-2);
        r.measured = count ? *std::min_element(mismatch.begin(), mismatch.end()) : 0.0;
        r.comparison = ">";
        r.passed = count > 0 && r.measured > r.threshold;
    }
    r.details = {{"expect", expect_hold ? "hold" : "violated"},
                 {"permutation", p.images_one_based()},
                 {"trajectories", count}};
    if (!expect_hold) r.details["until"] = until;
    return r;
}

inline MonitorResult monitor_crossing(const RunContext& c, const MonitorSpec& m) {
    const bool expect = m.params["expect"].get<bool>();
    std::size_t crossed = 0;
    Json first = nullptr;
    for (std::size_t i = 0; i < c.ensemble.trajectories.size(); ++i) {
        const auto& t = c.ensemble.trajectories[i];
        CrossingReport rep;
        if (i < c.kept || t.dim == 1) rep = detect_crossing(t);
        if (rep.crossed) {
            ++crossed;
            if (first.is_null()) first = {{"trajectory", i}, {"particles", {rep.i, rep.j}}, {"time", rep.time}};
        }
    }
    MonitorResult r{"crossing", expect ? crossed > 0 : crossed == 0, double(crossed), 0.0, expect ? ">" : "<=",
                    Json::object()};
    r.details = {{"expect", expect}, {"crossing_detected", crossed > 0}, {"first", first}};
    return r;
}

inline MonitorResult monitor_time_reversal(const RunContext& c, const MonitorSpec& m) {
    const double tol = param(m, "tolerance", 1e3 * c.s.tolerance);
    const std::size_t count = count_param(m, "max_trajectories", 20);
    const auto rt = time_reversal_round_trip(c.s, c.starts, count, c.opts.perturbation, c.opts.threads);
    MonitorResult r{"time_reversal", rt.tested > 0 && rt.max_deviation <= tol, rt.max_deviation, tol, "<=", Json::object()};
    r.details = {{"trajectories", rt.tested}, {"skipped", rt.skipped}};
    return r;
}

inline MonitorResult monitor_circulation(const RunContext& c, const MonitorSpec& m) {
    const auto& ap = *c.s.psi.anyon_params();
    const double expected = 2.0 * kPi * ap.ell() / ap.reduced_mass();
    const double tol = param(m, "tolerance", 1e-6);
    const double t = param(m, "time", c.s.t0);
    std::vector<double> radii{0.5, 1.0, 2.0};
    if (m.params.contains("radii")) radii = vector_field(m.params, m.pointer, "radii");
    Point2 center{0.0, 0.0};
    if (m.params.contains("center")) {
        const auto v = vector_field(m.params, m.pointer, "center");
        center = {v[0], v[1]};
    }
    double worst = 0.0;
    Json values = Json::array();
    for (double r : radii) {
        const double circ = circulation(c.field, circle_loop({0.0, 0.0}, r), t, center);
        values.push_back({{"radius", r}, {"circulation", circ}});
        worst = std::max(worst, std::abs(circ - expected));
    }
    MonitorResult res{"circulation", worst <= tol, worst, tol, "<=", Json::object()};
    res.details = {{"expected", expected}, {"ell", ap.ell()}, {"loops", values}};
    return res;
}

inline MonitorResult monitor_flux_loop(const RunContext& c, const MonitorSpec& m) {
    const double radius = param(m, "radius", 1.0);
    const double tol = param(m, "tolerance", 1e-8);
    double worst = 0.0;
    Json values = Json::array();
    for (const auto& line : c.s.potential.flux_lines()) {
        const double v = loop_integral(c.s.potential, circle_loop(line.position, radius));
        const double expected = c.s.potential.sign() * line.flux;
        values.push_back({{"flux", expected}, {"loop_integral", v}});
        worst = std::max(worst, std::abs(v - expected));
    }
    MonitorResult r{"flux_loop", worst <= tol, worst, tol, "<=", Json::object()};
    r.details = {{"lines", values}};
    return r;
}

inline MonitorResult monitor_gauge(const RunContext& c, const MonitorSpec& m) {
    const double tol = param(m, "tolerance", 1e-10);
    const std::size_t points = count_param(m, "points", 100);
    const auto seed = std::uint64_t(param(m, "seed", 1.0));
    PilotWave psi2 = c.s.psi;
    VectorPotential a2 = c.s.potential;
    for (const auto& chi : gauge_fields(m, c.s.psi.dim())) {
        auto g = gauge_transform(psi2, c.s.species, a2, chi);
        psi2 = g.psi;
        a2 = g.potential;
    }
    const GuidanceField transformed(psi2, c.s.species, a2, c.opts.perturbation);
    const auto xs = sample_initial(c.s.psi, c.s.t0, points, seed);
    double worst = 0.0;
    std::size_t skipped = 0;
    std::vector<double> v1(xs.front().size()), v2(xs.front().size());
    for (const double t : {c.s.t0, 0.5 * (c.s.t0 + c.s.t1), c.s.t1}) {
        for (const auto& x : xs) {
            try {
                c.field.velocity(x.view(), t, v1);
                transformed.velocity(x.view(), t, v2);
            } catch (const NodeError&) {
                ++skipped;
                continue;
            } catch (const DomainError&) {
                ++skipped;
                continue;
            }
            worst = std::max(worst, max_abs_difference(v1, v2));
        }
    }
    MonitorResult r{"gauge_invariance", worst <= tol, worst, tol, "<=", Json::object()};
    r.details = {{"points", points}, {"times", 3}, {"skipped", skipped}};
    return r;
}

inline MonitorResult monitor_equivariance(const RunContext& c, const MonitorSpec& m) {
    const double tol = param(m, "tolerance", 0.05);
    const double drift = param(m, "drift", 0.03);
    const auto& dd = c.ensemble.report.density_distance;
    MonitorResult r;
    r.name = "equivariance";
    r.threshold = tol;
    r.comparison = "<";
    if (dd.size() < 2) {
        r.measured = std::numeric_limits<double>::quiet_NaN();
        r.details = {{"reason", "no completed trajectories at t1"}};
        return r;
    }
    r.measured = dd.back().value;
    r.passed = dd.back().value < tol && dd.back().value <= dd.front().value + drift;
    r.details = {{"t0_distance", dd.front().value}, {"t1_distance", dd.back().value},
                 {"stderr", dd.back().std_error}, {"allowed_drift", drift}};
    return r;
}

inline MonitorResult monitor_node_aborts(const RunContext& c, const MonitorSpec& m) {
    const double max = param(m, "max", 0.0);
    const double aborts = double(c.ensemble.report.node_aborts);
    MonitorResult r{"node_aborts", aborts <= max, aborts, max, "<=", Json::object()};
    r.details = {{"step_underflows", c.ensemble.report.step_underflows}};
    return r;
}

inline void write_text(const std::filesystem::path& p, const std::string& text, std::vector<std::string>& artifacts) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write " + p.string());
    out << text;
    artifacts.push_back(p.string());
}

inline std::string numbered(const char* prefix, std::size_t i, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%04zu%s", prefix, i, suffix);
    return buf;
}

}  // namespace detail

/// Runs a validated scenario. Exit code 0 iff every enabled monitor passes.
inline RunResult run_scenario(const Scenario& s, const RunOptions& opts = {}) {
    using namespace detail;
    validate_monitors(s);

    const auto starts = initial_configurations(s, opts.seed);
    const std::uint64_t seed =
        opts.seed.value_or(s.initial.mode == InitialMode::sampled ? s.initial.seed : std::uint64_t{0});

    const GuidanceField field(s.psi, s.species, s.potential, opts.perturbation);
    EnsembleOptions eo;
    eo.integrator = integrator_options(s);
    eo.threads = opts.threads;
    eo.keep_full = s.initial.mode == InitialMode::explicit_list ? starts.size() : s.outputs.keep_full;
    eo.binning = s.binning;
    eo.seed = seed;
    auto ensemble = propagate_ensemble(field, starts, s.t0, s.t1, eo);
    const std::size_t kept = std::min(eo.keep_full, starts.size());

    RunResult result;
    const RunContext ctx{s, opts, field, starts, ensemble, kept};
    using Fn = MonitorResult (*)(const RunContext&, const MonitorSpec&);
    const std::vector<std::pair<std::string, Fn>> dispatch{
        {"min_distance", monitor_min_distance},       {"coincidence_persistence", monitor_coincidence},
        {"permutation_equivariance", monitor_permutation}, {"crossing", monitor_crossing},
        {"time_reversal", monitor_time_reversal},     {"circulation", monitor_circulation},
        {"flux_loop", monitor_flux_loop},             {"gauge_invariance", monitor_gauge},
        {"equivariance", monitor_equivariance},       {"node_aborts", monitor_node_aborts}};
    for (const auto& m : s.monitors) {
        for (const auto& [name, fn] : dispatch) {
            if (name == m.type) result.monitors.push_back(fn(ctx, m));
        }
    }
    result.exit_code = result.failures().empty() ? 0 : 1;
    result.report = ensemble.report;

    if (opts.out_dir) {
        namespace fs = std::filesystem;
        const fs::path dir = fs::path(*opts.out_dir) / s.name;
        fs::create_directories(dir);
        for (std::size_t i = 0; i < kept && s.outputs.trajectories; ++i) {
            const auto& t = ensemble.trajectories[i];
            std::ostringstream csv;
            write_trajectory_csv(csv, t);
            write_text(dir / numbered("trajectory_", i, ".csv"), csv.str(), result.artifacts);
            if (s.outputs.reduced) {
                std::ostringstream red;
                write_trajectory_csv(red, reduced_trajectory(t), true);
                write_text(dir / numbered("trajectory_", i, "_reduced.csv"), red.str(), result.artifacts);
            }
        }
        for (std::size_t i = 0; i < std::min<std::size_t>(kept, 4) && s.outputs.svg; ++i) {
            const auto& t = ensemble.trajectories[i];
            const std::string title = s.name + " #" + std::to_string(i);
            write_text(dir / numbered("trajectory_", i, "_t.svg"), svg_time_plot(t, title), result.artifacts);
            if (t.dim == 2) {
                write_text(dir / numbered("trajectory_", i, "_plan.svg"), svg_plan_view(t, title), result.artifacts);
            }
        }
        write_text(dir / "report.json", to_json(ensemble.report).dump(2) + "\n", result.artifacts);
        nlohmann::ordered_json mj;
        mj["scenario"] = s.name;
        mj["passed"] = result.exit_code == 0;
        mj["failures"] = result.failures();
        mj["monitors"] = nlohmann::ordered_json::array();
        for (const auto& m : result.monitors) mj["monitors"].push_back(to_json(m));
        write_text(dir / "monitors.json", mj.dump(2) + "\n", result.artifacts);
    }
    result.trajectories = std::move(ensemble.trajectories);
    return result;
}

}  // namespace pilotwave::experiments
