// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file ensemble.hpp
 * @brief Quantum-equilibrium sampling, ensemble propagation and density statistics.
 */

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/guidance.hpp>
#include <pilotwave/integrator.hpp>
#include <pilotwave/wavefunctions.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace pilotwave {

// ============================================================================
// Sampling
// ============================================================================

struct SamplerOptions {
    std::size_t burn_in = 1000;
    std::size_t thinning = 10;
    double proposal_scale = 0.0;  ///< 0: one characteristic length of psi at t0
};

/**
 * Random-walk Metropolis draws from |psi(., t0)|^2.
 *
 * Isotropic Gaussian proposals in all N*d coordinates; deterministic for a
 * given seed. The chain starts at the most probable of 256 draws around the
 * state's centre.
 */
inline std::vector<Configuration> sample_initial(const PilotWave& psi, double t0, std::size_t count, std::uint64_t seed,
                                                 const SamplerOptions& opts = {}) {
    if (count < 1) throw ParameterError("sample_initial: count must be positive");
    if (opts.thinning < 1) throw ParameterError("sample_initial: thinning must be positive");
    const std::size_t n = psi.particles();
    const std::size_t d = psi.dim();
    const std::size_t size = n * d;
    const double scale = opts.proposal_scale > 0.0 ? opts.proposal_scale : psi.length_scale(t0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const auto center = psi.center(t0);
    std::vector<double> y(center), trial(size);
    auto density = [&](const std::vector<double>& c) { return std::norm(psi.value(ConfigView{c, n, d}, t0)); };
    double p = density(y);
    for (int i = 0; i < 256; ++i) {
        for (std::size_t j = 0; j < size; ++j) trial[j] = center[j] + scale * normal(rng);
        const double pt = density(trial);
        if (pt > p) {
            p = pt;
            y = trial;
        }
    }
    if (!(p > 0.0)) throw NodeError("sample_initial: could not find a starting point with |psi| > 0");

    std::vector<Configuration> out;
    out.reserve(count);
    const std::size_t total = opts.burn_in + count * opts.thinning;
    for (std::size_t it = 1; it <= total; ++it) {
        for (std::size_t j = 0; j < size; ++j) trial[j] = y[j] + scale * normal(rng);
        const double pt = density(trial);
        if (pt >= p || uniform(rng) * p < pt) {
            y.swap(trial);
            p = pt;
        }
        if (it > opts.burn_in && (it - opts.burn_in) % opts.thinning == 0) out.emplace_back(n, d, y);
    }
    return out;
}

// ============================================================================
// Histogram distance
// ============================================================================

struct AxisBins {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 10;
};

/// One AxisBins per configuration coordinate (N*d of them, particle-major).
struct Binning {
    std::vector<AxisBins> axes;
};

struct DensityDistance {
    double value = 0.0;
    double std_error = 0.0;    ///< expected L1 distance of an exact |psi|^2 sample of this size
    double coverage = 0.0;  ///< |psi|^2 mass inside the bins
};

/// Bin-integrated |psi(., t)|^2 by 4-point Gauss-Legendre per axis and bin.
inline std::vector<double> bin_probabilities(const PilotWave& psi, double t, const Binning& binning) {
    static constexpr std::array<double, 4> gx{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                              0.8611363115940526};
    static constexpr std::array<double, 4> gw{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                              0.3478548451374538};
    const std::size_t dims = binning.axes.size();
    std::size_t cells = 1;
    for (const auto& a : binning.axes) cells *= a.bins;
    std::size_t nodes = 1;
    for (std::size_t i = 0; i < dims; ++i) nodes *= gx.size();

    std::vector<double> probs(cells, 0.0);
    std::vector<double> x(dims);
    std::vector<std::size_t> cell_idx(dims), node_idx(dims);
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t rem = c;
        for (std::size_t i = dims; i-- > 0;) {
            cell_idx[i] = rem % binning.axes[i].bins;
            rem /= binning.axes[i].bins;
        }
        double sum = 0.0;
        for (std::size_t q = 0; q < nodes; ++q) {
            std::size_t r = q;
            double w = 1.0;
            for (std::size_t i = dims; i-- > 0;) {
                node_idx[i] = r % gx.size();
                r /= gx.size();
                const auto& ax = binning.axes[i];
                const double width = (ax.hi - ax.lo) / double(ax.bins);
                const double lo = ax.lo + width * double(cell_idx[i]);
                x[i] = lo + 0.5 * width * (gx[node_idx[i]] + 1.0);
                w *= 0.5 * width * gw[node_idx[i]];
            }
            sum += w * std::norm(psi.value(ConfigView{x, psi.particles(), psi.dim()}, t));
        }
        probs[c] = sum;
    }
    return probs;
}

/**
 * L1 distance between the sample histogram and the bin-integrated |psi|^2.
 *
 * Samples outside the bins and the |psi|^2 mass outside them form one extra
 * cell, so the result lies in [0, 2]. Throws ParameterError when the bins hold
 * less than 99.9% of the |psi|^2 mass.
 */
inline DensityDistance density_distance(const std::vector<Configuration>& samples, const PilotWave& psi, double t,
                                        const Binning& binning) {
    if (binning.axes.size() != psi.particles() * psi.dim()) {
        throw ParameterError("density distance: binning needs one axis per configuration coordinate");
    }
    for (const auto& a : binning.axes) {
        if (!(a.hi > a.lo) || a.bins == 0) throw ParameterError("density distance: malformed axis binning");
    }
    if (samples.empty()) throw ParameterError("density distance: no samples");
    const auto probs = bin_probabilities(psi, t, binning);
    double covered = 0.0;
    for (double p : probs) covered += p;
    if (covered < 0.999) {
        throw ParameterError("density distance: bins cover only " + std::to_string(covered) + " of the |psi|^2 mass");
    }

    std::vector<double> counts(probs.size(), 0.0);
    double outside = 0.0;
    for (const auto& s : samples) {
        std::size_t c = 0;
        bool inside = true;
        for (std::size_t i = 0; i < binning.axes.size(); ++i) {
            const auto& ax = binning.axes[i];
            const double u = (s.coords()[i] - ax.lo) / (ax.hi - ax.lo);
            if (!(u >= 0.0 && u < 1.0)) {
                inside = false;
                break;
            }
            const std::size_t b = std::min(ax.bins - 1, static_cast<std::size_t>(u * double(ax.bins)));
            c = c * ax.bins + b;
        }
        if (inside) {
            counts[c] += 1.0;
        } else {
            outside += 1.0;
        }
    }
    const double n = double(samples.size());
    DensityDistance out;
    out.coverage = covered;
    const double p_out = std::max(0.0, 1.0 - covered);
    out.value = std::abs(outside / n - p_out);
    out.std_error = std::sqrt(2.0 * p_out * (1.0 - p_out) / (kPi * n));
    for (std::size_t c = 0; c < probs.size(); ++c) {
        out.value += std::abs(counts[c] / n - probs[c]);
        out.std_error += std::sqrt(2.0 * probs[c] * std::max(0.0, 1.0 - probs[c]) / (kPi * n));
    }
    return out;
}

// ============================================================================
// Propagation
// ============================================================================

inline constexpr std::array<double, 3> kCoincidenceEpsilons{1e-1, 1e-2, 1e-3};

struct DensityRecord {
    double t = 0.0;
    double value = 0.0;
    double std_error = 0.0;
};

struct EnsembleReport {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<DensityRecord> density_distance;
    std::array<double, 3> coincidence_fraction{0.0, 0.0, 0.0};  ///< at eps = 1e-1, 1e-2, 1e-3
    std::size_t node_aborts = 0;
    std::size_t step_underflows = 0;
};

/// Schema: {"n", "seed", "density_distance": [{"t","value","stderr"}], "coincidence_fraction": {"1e-1","1e-2","1e-3"}, "node_aborts"}.
inline nlohmann::ordered_json to_json(const EnsembleReport& r) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["density_distance"] = nlohmann::ordered_json::array();
    for (const auto& d : r.density_distance) {
        nlohmann::ordered_json e;
        e["t"] = d.t;
        e["value"] = d.value;
        e["stderr"] = d.std_error;
        j["density_distance"].push_back(e);
    }
    j["coincidence_fraction"] = {{"1e-1", r.coincidence_fraction[0]},
                                 {"1e-2", r.coincidence_fraction[1]},
                                 {"1e-3", r.coincidence_fraction[2]}};
    j["node_aborts"] = r.node_aborts;
    return j;
}

struct EnsembleOptions {
    IntegratorOptions integrator{};
    std::size_t threads = 1;
    std::size_t keep_full = 0;  ///< the first keep_full trajectories retain dense samples
    std::optional<Binning> binning;
    std::uint64_t seed = 0;     ///< recorded in the report
};

struct EnsembleResult {
    std::vector<Trajectory> trajectories;
    EnsembleReport report;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results must be written by index.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/**
 * Integrates every sample independently and aggregates the monitors.
 *
 * Node aborts are counted rather than thrown. Results are independent of the
 * worker count: each trajectory is computed from its own inputs and the
 * reductions run in index order afterwards.
 */
inline EnsembleResult propagate_ensemble(const GuidanceField& field, const std::vector<Configuration>& samples, double t0,
                                         double t1, const EnsembleOptions& opts = {}) {
    EnsembleResult result;
    result.trajectories.resize(samples.size());
    parallel_for(samples.size(), opts.threads, [&](std::size_t i) {
        IntegratorOptions io = opts.integrator;
        io.keep_samples = io.keep_samples && i < opts.keep_full;
        try {
            result.trajectories[i] = integrate(field, samples[i], t0, t1, io);
        } catch (const NodeError&) {
            Trajectory t;
            t.particles = samples[i].particles();
            t.dim = samples[i].dim();
            t.samples.push_back(Sample{t0, samples[i], {}});
            t.meta.termination = Termination::node_abort;
            t.meta.min_amplitude = 0.0;
            result.trajectories[i] = std::move(t);
        }
    });

    auto& rep = result.report;
    rep.n = samples.size();
    rep.seed = opts.seed;
    std::vector<Configuration> finals;
    finals.reserve(samples.size());
    std::array<std::size_t, 3> close{0, 0, 0};
    for (const auto& t : result.trajectories) {
        if (t.meta.termination == Termination::node_abort) ++rep.node_aborts;
        if (t.meta.termination == Termination::step_underflow) ++rep.step_underflows;
        if (t.meta.termination == Termination::completed) finals.push_back(t.back().x);
        for (std::size_t e = 0; e < kCoincidenceEpsilons.size(); ++e) {
            if (t.meta.min_pair_distance < kCoincidenceEpsilons[e]) ++close[e];
        }
    }
    for (std::size_t e = 0; e < close.size(); ++e) {
        rep.coincidence_fraction[e] = samples.empty() ? 0.0 : double(close[e]) / double(samples.size());
    }
    if (opts.binning) {
        const auto d0 = density_distance(samples, field.psi(), t0, *opts.binning);
        rep.density_distance.push_back({t0, d0.value, d0.std_error});
        if (!finals.empty() && t1 != t0) {
            const auto d1 = density_distance(finals, field.psi(), t1, *opts.binning);
            rep.density_distance.push_back({t1, d1.value, d1.std_error});
        }
    }
    return result;
}

}  // namespace pilotwave
