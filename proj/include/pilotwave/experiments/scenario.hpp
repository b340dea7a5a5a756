// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file scenario.hpp
 * @brief JSON scenario documents: schema, validation and construction of the physics objects.
 *
 * A scenario is validated completely before anything is computed. Physical
 * parameters (masses, widths, frequencies, charges, times) have no defaults;
 * the integrator tolerance (1e-9), the output cadence (200 per unit time) and
 * the output layout do.
 */

#pragma once

#include <pilotwave/pilotwave.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pilotwave::experiments {

using Json = nlohmann::json;

/// Validation failure; `where` is a JSON pointer or "line L, column C".
class ValidationError : public ConfigurationError {
public:
    ValidationError(std::string where, const std::string& what)
        : ConfigurationError(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

enum class InitialMode { explicit_list, sampled };

struct InitialCondition {
    InitialMode mode = InitialMode::explicit_list;
    std::vector<Configuration> configurations;  ///< explicit mode
    std::size_t count = 0;                      ///< sampled mode
    std::uint64_t seed = 0;
};

/// One enabled monitor; `params` keeps the raw settings for the runner.
struct MonitorSpec {
    std::string type;
    Json params = Json::object();
    std::string pointer;
};

struct OutputSpec {
    bool trajectories = true;
    bool reduced = false;        ///< also write canonicalised trajectories
    bool svg = true;
    std::size_t keep_full = 10;  ///< trajectories written with all samples (sampled mode)
};

struct Scenario {
    Scenario(std::string n, Json state, PilotWave wave)
        : name(std::move(n)), state_json(std::move(state)), psi(std::move(wave)) {}

    std::string name;
    Json state_json;
    PilotWave psi;
    SpeciesTable species;
    VectorPotential potential;
    InitialCondition initial;
    double t0 = 0.0;
    double t1 = 0.0;
    double tolerance = 1e-9;
    double cadence = 200.0;
    bool reject_coincident_starts = false;  ///< "coincident_starts": "reject"
    bool collapse_coincident = false;
    std::optional<Binning> binning;
    std::vector<MonitorSpec> monitors;
    OutputSpec outputs;
};

inline const std::vector<std::string>& monitor_types() {
    static const std::vector<std::string> types{
        "min_distance", "coincidence_persistence", "permutation_equivariance", "crossing", "time_reversal",
        "circulation",  "flux_loop",               "gauge_invariance",         "equivariance", "node_aborts"};
    return types;
}

namespace detail {

inline std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline const Json& require(const Json& obj, const std::string& ptr, const std::string& key) {
    if (!obj.is_object()) throw ValidationError(ptr, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(child(ptr, key), "required field is missing");
    return *it;
}

inline double as_number(const Json& j, const std::string& ptr) {
    if (!j.is_number()) throw ValidationError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(ptr, "expected a finite number");
    return v;
}

inline double positive(const Json& j, const std::string& ptr) {
    const double v = as_number(j, ptr);
    if (!(v > 0.0)) throw ValidationError(ptr, "must be positive");
    return v;
}

inline double number_field(const Json& obj, const std::string& ptr, const std::string& key) {
    return as_number(require(obj, ptr, key), child(ptr, key));
}

inline double positive_field(const Json& obj, const std::string& ptr, const std::string& key) {
    return positive(require(obj, ptr, key), child(ptr, key));
}

inline std::int64_t integer(const Json& j, const std::string& ptr) {
    if (!j.is_number_integer()) throw ValidationError(ptr, "expected an integer");
    return j.get<std::int64_t>();
}

inline std::string string_field(const Json& obj, const std::string& ptr, const std::string& key) {
    const auto& j = require(obj, ptr, key);
    if (!j.is_string()) throw ValidationError(child(ptr, key), "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> vector_field(const Json& obj, const std::string& ptr, const std::string& key) {
    const auto& j = require(obj, ptr, key);
    const std::string p = child(ptr, key);
    if (!j.is_array() || j.empty()) throw ValidationError(p, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], child(p, i)));
    return out;
}

inline Complex coefficient(const Json& j, const std::string& ptr) {
    if (j.is_number()) return {as_number(j, ptr), 0.0};
    if (j.is_array() && j.size() == 2) return {as_number(j[0], child(ptr, 0)), as_number(j[1], child(ptr, 1))};
    throw ValidationError(ptr, "expected a number or a [re, im] pair");
}

inline void check_keys(const Json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ValidationError(child(ptr, k), "unknown field");
    }
}

/// A built state with the mass each particle carries in it.
struct BuiltState {
    PilotWave psi;
    std::vector<double> masses;
};

inline SingleParticleState single_particle(const Json& j, const std::string& ptr) {
    const std::string type = string_field(j, ptr, "type");
    try {
        if (type == "gaussian_packet") {
            check_keys(j, ptr, {"type", "center", "momentum", "width", "mass"});
            const auto c = vector_field(j, ptr, "center");
            const auto p = vector_field(j, ptr, "momentum");
            if (c.size() > 3) throw ValidationError(child(ptr, "center"), "dimension must be 1, 2 or 3");
            if (p.size() != c.size()) throw ValidationError(child(ptr, "momentum"), "length differs from center");
            return make_gaussian_packet(c, p, positive_field(j, ptr, "width"), positive_field(j, ptr, "mass"));
        }
        if (type == "oscillator") {
            check_keys(j, ptr, {"type", "levels", "frequency", "mass"});
            const auto& lv = require(j, ptr, "levels");
            const std::string lp = child(ptr, "levels");
            if (!lv.is_array() || lv.empty() || lv.size() > 3) throw ValidationError(lp, "expected 1 to 3 levels");
            std::vector<int> levels;
            for (std::size_t i = 0; i < lv.size(); ++i) {
                const auto n = integer(lv[i], child(lp, i));
                if (n < 0 || n > 60) throw ValidationError(child(lp, i), "level must lie in [0, 60]");
                levels.push_back(int(n));
            }
            return make_oscillator_eigenstate(levels, positive_field(j, ptr, "frequency"), positive_field(j, ptr, "mass"));
        }
    } catch (const ParameterError& e) {
        throw ValidationError(ptr, e.what());
    }
    throw ValidationError(child(ptr, "type"), "unknown single-particle state '" + type + "'");
}

inline std::vector<SingleParticleState> factor_list(const Json& j, const std::string& ptr) {
    const auto& f = require(j, ptr, "factors");
    const std::string fp = child(ptr, "factors");
    if (!f.is_array() || f.empty()) throw ValidationError(fp, "expected a non-empty array of single-particle states");
    if (f.size() > kMaxParticles) throw ValidationError(fp, "at most 16 particles");
    std::vector<SingleParticleState> out;
    for (std::size_t i = 0; i < f.size(); ++i) out.push_back(single_particle(f[i], child(fp, i)));
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].dim() != out[0].dim()) throw ValidationError(child(fp, i), "dimension differs from factor 0");
    }
    return out;
}

inline BuiltState build_state(const Json& j, const std::string& ptr) {
    if (!j.is_object()) throw ValidationError(ptr, "expected a state object");
    const std::string type = string_field(j, ptr, "type");
    auto masses_of = [](const std::vector<SingleParticleState>& f) {
        std::vector<double> m;
        for (const auto& s : f) m.push_back(s.mass());
        return m;
    };
    try {
        if (type == "gaussian_packet" || type == "oscillator") {
            auto s = single_particle(j, ptr);
            return {make_product({s}), {s.mass()}};
        }
        if (type == "product") {
            check_keys(j, ptr, {"type", "factors"});
            auto f = factor_list(j, ptr);
            return {make_product(f), masses_of(f)};
        }
        if (type == "symmetrized" || type == "antisymmetrized") {
            check_keys(j, ptr, {"type", "factors"});
            auto f = factor_list(j, ptr);
            const auto m = masses_of(f);
            for (std::size_t i = 1; i < m.size(); ++i) {
                if (m[i] != m[0]) throw ValidationError(child(child(ptr, "factors"), i), "identical particles need equal masses");
            }
            auto prod = make_product(f);
            return {type == "symmetrized" ? symmetrize(prod) : antisymmetrize(prod), m};
        }
        if (type == "anyon_pair") {
            check_keys(j, ptr, {"type", "nu", "k", "frequency", "mass"});
            const double nu = number_field(j, ptr, "nu");
            if (!(nu >= 0.0 && nu < 2.0)) throw ValidationError(child(ptr, "nu"), "must lie in [0, 2)");
            const auto k = integer(require(j, ptr, "k"), child(ptr, "k"));
            const double m = positive_field(j, ptr, "mass");
            return {make_anyon_pair_state(nu, int(k), positive_field(j, ptr, "frequency"), m), {m, m}};
        }
        if (type == "superposition") {
            check_keys(j, ptr, {"type", "terms"});
            const auto& t = require(j, ptr, "terms");
            const std::string tp = child(ptr, "terms");
            if (!t.is_array() || t.empty()) throw ValidationError(tp, "expected a non-empty array of terms");
            std::vector<std::pair<Complex, PilotWave>> terms;
            std::vector<double> masses;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const std::string ip = child(tp, i);
                check_keys(t[i], ip, {"coefficient", "state"});
                const Complex c = coefficient(require(t[i], ip, "coefficient"), child(ip, "coefficient"));
                auto built = build_state(require(t[i], ip, "state"), child(ip, "state"));
                if (i == 0) {
                    masses = built.masses;
                } else if (built.masses != masses) {
                    throw ValidationError(child(ip, "state"), "particle masses differ from term 0");
                }
                terms.emplace_back(c, std::move(built.psi));
            }
            return {superpose(terms), masses};
        }
        if (type == "time_reversed") {
            check_keys(j, ptr, {"type", "state", "pivot"});
            auto inner = build_state(require(j, ptr, "state"), child(ptr, "state"));
            return {time_reversed_wave(inner.psi, number_field(j, ptr, "pivot")), inner.masses};
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(ptr, e.what());
    }
    throw ValidationError(child(ptr, "type"), "unknown state type '" + type + "'");
}

inline Statistics parse_statistics(const std::string& s, const std::string& ptr) {
    if (s == "boson") return Statistics::boson;
    if (s == "fermion") return Statistics::fermion;
    if (s == "anyon") return Statistics::anyon;
    if (s == "distinguishable") return Statistics::distinguishable;
    throw ValidationError(ptr, "statistics must be boson, fermion, anyon or distinguishable");
}

inline SpeciesTable parse_species(const Json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) throw ValidationError(ptr, "expected one entry per particle");
    std::vector<ParticleSpecies> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = child(ptr, i);
        check_keys(j[i], p, {"mass", "charge", "statistics", "nu", "label"});
        ParticleSpecies s;
        s.mass = positive_field(j[i], p, "mass");
        s.charge = number_field(j[i], p, "charge");
        s.statistics = parse_statistics(string_field(j[i], p, "statistics"), child(p, "statistics"));
        if (s.statistics == Statistics::anyon) s.nu = number_field(j[i], p, "nu");
        if (j[i].contains("label")) s.label = string_field(j[i], p, "label");
        v.push_back(s);
    }
    try {
        return SpeciesTable(std::move(v));
    } catch (const ParameterError& e) {
        throw ValidationError(ptr, e.what());
    }
}

inline ScalarField parse_scalar_field(const Json& j, const std::string& ptr) {
    const std::string type = string_field(j, ptr, "type");
    if (type == "constant") {
        check_keys(j, ptr, {"type", "value"});
        return make_constant_field(number_field(j, ptr, "value"));
    }
    if (type == "linear") {
        check_keys(j, ptr, {"type", "a", "b"});
        return make_linear_field(vector_field(j, ptr, "a"), j.contains("b") ? number_field(j, ptr, "b") : 0.0);
    }
    if (type == "flux_angle") {
        check_keys(j, ptr, {"type", "flux", "position"});
        const auto pos = vector_field(j, ptr, "position");
        if (pos.size() != 2) throw ValidationError(child(ptr, "position"), "expected a planar position");
        return make_flux_angle_field(number_field(j, ptr, "flux"), {pos[0], pos[1]});
    }
    throw ValidationError(child(ptr, "type"), "scalar field must be constant, linear or flux_angle");
}

inline VectorPotential parse_potential(const Json& j, const std::string& ptr, std::size_t dim) {
    check_keys(j, ptr, {"flux_lines", "gradients"});
    VectorPotential a;
    if (j.contains("flux_lines")) {
        const auto& lines = j["flux_lines"];
        const std::string lp = child(ptr, "flux_lines");
        if (!lines.is_array()) throw ValidationError(lp, "expected an array");
        if (!lines.empty() && dim != 2) throw ValidationError(lp, "flux lines need d = 2");
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::string p = child(lp, i);
            check_keys(lines[i], p, {"flux", "position"});
            const auto pos = vector_field(lines[i], p, "position");
            if (pos.size() != 2) throw ValidationError(child(p, "position"), "expected a planar position");
            a = a.with_flux_line({number_field(lines[i], p, "flux"), {pos[0], pos[1]}});
        }
    }
    if (j.contains("gradients")) {
        const auto& g = j["gradients"];
        const std::string gp = child(ptr, "gradients");
        if (!g.is_array()) throw ValidationError(gp, "expected an array");
        for (std::size_t i = 0; i < g.size(); ++i) a = a.plus_gradient(parse_scalar_field(g[i], child(gp, i)));
    }
    return a;
}

inline Configuration parse_configuration(const Json& j, const std::string& ptr, std::size_t n, std::size_t d) {
    if (!j.is_array() || j.size() != n) {
        throw ValidationError(ptr, "expected " + std::to_string(n) + " particle positions");
    }
    std::vector<double> c;
    for (std::size_t k = 0; k < n; ++k) {
        const std::string p = child(ptr, k);
        if (!j[k].is_array() || j[k].size() != d) throw ValidationError(p, "expected " + std::to_string(d) + " coordinates");
        for (std::size_t a = 0; a < d; ++a) c.push_back(as_number(j[k][a], child(p, a)));
    }
    return Configuration(n, d, std::move(c));
}

inline Binning parse_binning(const Json& j, const std::string& ptr, std::size_t coords) {
    check_keys(j, ptr, {"lo", "hi", "bins"});
    const double lo = number_field(j, ptr, "lo");
    const double hi = number_field(j, ptr, "hi");
    if (!(hi > lo)) throw ValidationError(child(ptr, "hi"), "must exceed lo");
    const auto bins = integer(require(j, ptr, "bins"), child(ptr, "bins"));
    if (bins < 1) throw ValidationError(child(ptr, "bins"), "must be at least 1");
    double cells = 1.0;
    for (std::size_t i = 0; i < coords; ++i) cells *= double(bins);
    if (cells > 2e6) throw ValidationError(ptr, "joint histogram would exceed 2e6 cells");
    Binning b;
    b.axes.assign(coords, AxisBins{lo, hi, std::size_t(bins)});
    return b;
}

}  // namespace detail

/**
 * Parses and validates a scenario document.
 *
 * Every error is a ValidationError naming the offending field by JSON pointer.
 */
inline Scenario parse_scenario(const Json& doc) {
    using namespace detail;
    const std::string root;
    if (!doc.is_object()) throw ValidationError("/", "scenario must be a JSON object");
    check_keys(doc, root,
               {"name", "description", "state", "species", "vector_potential", "initial", "time", "tolerance", "cadence",
                "coincident_starts", "collapse_coincident", "binning", "monitors", "outputs"});
    const std::string name = string_field(doc, root, "name");
    if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
        throw ValidationError("/name", "must be a non-empty plain file name");
    }
    const Json& state_json = require(doc, root, "state");
    auto built = build_state(state_json, "/state");
    Scenario s(name, state_json, built.psi);
    const std::size_t n = s.psi.particles();
    const std::size_t d = s.psi.dim();

    s.species = parse_species(require(doc, root, "species"), "/species");
    if (s.species.size() != n) {
        throw ValidationError("/species", "has " + std::to_string(s.species.size()) + " entries for " + std::to_string(n) +
                                              " particles");
    }
    try {
        s.species.validate_dimension(d);
    } catch (const ParameterError& e) {
        throw ValidationError("/species", e.what());
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (s.species.mass(k) != built.masses[k]) {
            throw ValidationError(child("/species", k) + "/mass", "differs from the mass used in the state");
        }
    }
    const auto tag = s.psi.symmetry();
    auto all_stats = [&](Statistics st) {
        for (std::size_t k = 0; k < n; ++k) {
            if (s.species[k].statistics != st) return false;
        }
        return true;
    };
    if (n > 1) {
        if (tag.kind == SymmetryKind::symmetric && !all_stats(Statistics::boson)) {
            throw ValidationError("/species", "a symmetric state needs boson species");
        }
        if (tag.kind == SymmetryKind::antisymmetric && !all_stats(Statistics::fermion)) {
            throw ValidationError("/species", "an antisymmetric state needs fermion species");
        }
        if (tag.kind == SymmetryKind::anyonic) {
            if (!all_stats(Statistics::anyon)) throw ValidationError("/species", "an anyonic state needs anyon species");
            for (std::size_t k = 0; k < n; ++k) {
                if (s.species[k].nu != tag.nu) throw ValidationError(child("/species", k) + "/nu", "differs from the state");
            }
        }
        if (tag.kind == SymmetryKind::none && !all_stats(Statistics::distinguishable)) {
            throw ValidationError("/species", "a state without exchange symmetry needs distinguishable species");
        }
    }

    if (doc.contains("vector_potential")) s.potential = parse_potential(doc["vector_potential"], "/vector_potential", d);

    const auto& init = require(doc, root, "initial");
    const std::string mode = string_field(init, "/initial", "mode");
    if (mode == "explicit") {
        check_keys(init, "/initial", {"mode", "configurations"});
        s.initial.mode = InitialMode::explicit_list;
        const auto& cfgs = require(init, "/initial", "configurations");
        if (!cfgs.is_array() || cfgs.empty()) throw ValidationError("/initial/configurations", "expected a non-empty array");
        for (std::size_t i = 0; i < cfgs.size(); ++i) {
            s.initial.configurations.push_back(parse_configuration(cfgs[i], child("/initial/configurations", i), n, d));
        }
    } else if (mode == "sampled") {
        check_keys(init, "/initial", {"mode", "count", "seed"});
        s.initial.mode = InitialMode::sampled;
        const auto count = integer(require(init, "/initial", "count"), "/initial/count");
        if (count < 1) throw ValidationError("/initial/count", "must be at least 1");
        const auto seed = integer(require(init, "/initial", "seed"), "/initial/seed");
        if (seed < 0) throw ValidationError("/initial/seed", "must be non-negative");
        s.initial.count = std::size_t(count);
        s.initial.seed = std::uint64_t(seed);
    } else {
        throw ValidationError("/initial/mode", "must be 'explicit' or 'sampled'");
    }

    const auto& time = require(doc, root, "time");
    check_keys(time, "/time", {"t0", "t1"});
    s.t0 = number_field(time, "/time", "t0");
    s.t1 = number_field(time, "/time", "t1");
    if (!(s.t1 > s.t0)) throw ValidationError("/time/t1", "must exceed t0");
    if (std::abs(s.t1 - s.t0) > 1e4) throw ValidationError("/time", "time window longer than 1e4");

    if (doc.contains("tolerance")) {
        s.tolerance = positive(doc["tolerance"], "/tolerance");
        if (s.tolerance > 1e-2) throw ValidationError("/tolerance", "must not exceed 1e-2");
    }
    if (doc.contains("cadence")) s.cadence = positive(doc["cadence"], "/cadence");
    if (doc.contains("coincident_starts")) {
        const std::string v = string_field(doc, root, "coincident_starts");
        if (v != "allow" && v != "reject") throw ValidationError("/coincident_starts", "must be 'allow' or 'reject'");
        s.reject_coincident_starts = v == "reject";
    }
    if (doc.contains("collapse_coincident")) {
        if (!doc["collapse_coincident"].is_boolean()) throw ValidationError("/collapse_coincident", "expected true or false");
        s.collapse_coincident = doc["collapse_coincident"].get<bool>();
    }
    if (s.reject_coincident_starts) {
        for (std::size_t i = 0; i < s.initial.configurations.size(); ++i) {
            if (n > 1 && min_pairwise_distance(s.initial.configurations[i]) < kCoincidenceThreshold) {
                throw ValidationError(child("/initial/configurations", i), "start lies on the coincidence set");
            }
        }
    }
    if (doc.contains("binning")) s.binning = parse_binning(doc["binning"], "/binning", n * d);

    if (doc.contains("monitors")) {
        const auto& m = doc["monitors"];
        if (!m.is_array()) throw ValidationError("/monitors", "expected an array");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string p = child("/monitors", i);
            MonitorSpec spec;
            spec.pointer = p;
            if (m[i].is_string()) {
                spec.type = m[i].get<std::string>();
            } else if (m[i].is_object()) {
                spec.type = string_field(m[i], p, "type");
                spec.params = m[i];
                spec.params.erase("type");
            } else {
                throw ValidationError(p, "expected a monitor name or object");
            }
            bool known = false;
            for (const auto& t : monitor_types()) known = known || t == spec.type;
            if (!known) throw ValidationError(p, "unknown monitor '" + spec.type + "'");
            s.monitors.push_back(std::move(spec));
        }
    }

    if (doc.contains("outputs")) {
        const auto& o = doc["outputs"];
        check_keys(o, "/outputs", {"trajectories", "reduced", "svg", "keep_full"});
        auto flag = [&](const char* key, bool& dst) {
            if (!o.contains(key)) return;
            if (!o[key].is_boolean()) throw ValidationError(child("/outputs", key), "expected true or false");
            dst = o[key].get<bool>();
        };
        flag("trajectories", s.outputs.trajectories);
        flag("reduced", s.outputs.reduced);
        flag("svg", s.outputs.svg);
        if (o.contains("keep_full")) {
            const auto k = integer(o["keep_full"], "/outputs/keep_full");
            if (k < 0) throw ValidationError("/outputs/keep_full", "must be non-negative");
            s.outputs.keep_full = std::size_t(k);
        }
    }
    return s;
}

/// Parses JSON text; syntax errors are reported by line and column.
inline Scenario parse_scenario_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ValidationError("line " + std::to_string(line) + ", column " + std::to_string(col), "malformed JSON");
    }
    return parse_scenario(doc);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path, "cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

}  // namespace pilotwave::experiments
