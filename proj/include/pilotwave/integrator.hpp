// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file integrator.hpp
 * @brief Adaptive Dormand-Prince 5(4) integration of the guidance ODE.
 *
 * Steps are controlled by a PI controller on the mixed error norm
 * |e_i| / (tol (1 + |y_i|)). Output is sampled on a fixed time grid
 * t0 + j / cadence from the continuous extension of each accepted step, so
 * runs with equal inputs produce equal sample times.
 */

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/guidance.hpp>
#include <pilotwave/wavefunctions.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pilotwave {

enum class Termination { completed, node_abort, step_underflow };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::node_abort: return "node_abort";
        case Termination::step_underflow: return "step_underflow";
    }
    return "unknown";
}

struct IntegratorOptions {
    double tol = 1e-9;
    double cadence = 200.0;            ///< output samples per unit time
    bool keep_samples = true;          ///< false: keep only the endpoints (monitors still run on the grid)
    bool collapse_coincident = false;  ///< pin initially coincident particles to their common mean
    double near_coincidence = 1e-6;    ///< below this pair distance the step is capped by distance / speed
    std::size_t max_steps = 20'000'000;
};

struct Sample {
    double t = 0.0;
    Configuration x;
    std::vector<double> v;  ///< velocities, particle-major
};

struct TrajectoryMeta {
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t field_evaluations = 0;
    double min_amplitude = std::numeric_limits<double>::infinity();
    double min_pair_distance = std::numeric_limits<double>::infinity();
    double min_pair_time = 0.0;
    /// Largest pair distance reached inside groups that start exactly coincident.
    double max_coincident_spread = 0.0;
    Termination termination = Termination::completed;
};

/// Samples are ordered along the direction of integration (time decreasing for backward runs).
struct Trajectory {
    std::size_t particles = 0;
    std::size_t dim = 0;
    std::vector<Sample> samples;
    TrajectoryMeta meta;

    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }
};

namespace detail {

struct DormandPrince {
    static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr std::array<double, 7> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
    static constexpr std::array<double, 7> e{71.0 / 57600,      0.0,          -71.0 / 16695, 71.0 / 1920,
                                             -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
    /// Continuous extension: y(t + th h) = y + h sum_i k_i sum_j P[i][j] th^(j+1).
    static constexpr std::array<std::array<double, 4>, 7> P{{
        {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
        {0.0, 0.0, 0.0, 0.0},
        {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
        {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
        {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
        {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
        {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
    }};
};

/// Coordinate groups that coincide exactly in `x`.
inline std::vector<std::vector<std::size_t>> coincident_groups(const ConfigView& x) {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<bool> used(x.particles, false);
    for (std::size_t i = 0; i < x.particles; ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> g{i};
        for (std::size_t j = i + 1; j < x.particles; ++j) {
            if (!used[j] && pair_distance(x, i, j) == 0.0) {
                g.push_back(j);
                used[j] = true;
            }
        }
        if (g.size() > 1) groups.push_back(std::move(g));
    }
    return groups;
}

struct ClosestPair {
    double distance = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    std::size_t j = 0;
};

inline ClosestPair closest_pair(const ConfigView& x) {
    ClosestPair best;
    for (std::size_t i = 0; i < x.particles; ++i) {
        for (std::size_t j = i + 1; j < x.particles; ++j) {
            const double d = pair_distance(x, i, j);
            if (d < best.distance) best = {d, i, j};
        }
    }
    return best;
}

class Integration {
public:
    Integration(const GuidanceField& field, const Configuration& x0, double t0, double t1, const IntegratorOptions& opts)
        : field_(field), opts_(opts), t0_(t0), t1_(t1), n_(x0.particles()), d_(x0.dim()), size_(x0.size()) {
        field.psi().check_compatible(x0);
        if (!(opts.tol > 0.0)) throw ParameterError("integrate: tolerance must be positive");
        if (!(opts.cadence > 0.0)) throw ParameterError("integrate: cadence must be positive");
        if (!std::isfinite(t0) || !std::isfinite(t1)) throw ParameterError("integrate: non-finite time window");
        y_.assign(x0.coords().begin(), x0.coords().end());
        groups_ = coincident_groups(x0.view());
        traj_.particles = n_;
        traj_.dim = d_;
    }

    Trajectory run() {
        const double amp0 = field_.amplitude(view(y_), t0_);
        if (!(amp0 >= field_.psi().node_threshold())) {
            throw NodeError("integrate: initial configuration is a node of the pilot wave");
        }
        traj_.meta.min_amplitude = amp0;
        k_[0].resize(size_);
        eval(t0_, y_, k_[0]);
        monitor(t0_, y_);
        push_sample(t0_, y_, k_[0]);
        if (t1_ == t0_) return finish(t0_, k_[0]);

        const double dir = t1_ > t0_ ? 1.0 : -1.0;
        const double span = std::abs(t1_ - t0_);
        const double min_step = 1e-14 * span;
        for (auto& k : k_) k.resize(size_);
        std::vector<double> ytmp(size_), ynew(size_), err(size_);

        double t = t0_;
        double h = dir * initial_step(span);
        double err_old = 1e-4;
        next_sample_ = 1;

        while (dir * (t1_ - t) > 1e-15 * std::max(1.0, span)) {
            if (traj_.meta.accepted_steps + traj_.meta.rejected_steps >= opts_.max_steps) {
                traj_.meta.termination = Termination::step_underflow;
                break;
            }
            if (dir * (t + h - t1_) > 0.0) h = t1_ - t;
            h = dir * std::min(std::abs(h), coincidence_cap());
            if (std::abs(h) < min_step) {
                traj_.meta.termination = Termination::step_underflow;
                break;
            }

            double err_norm = 0.0;
            bool stage_failed = false;
            try {
                stages(t, h, ytmp, ynew);
            } catch (const NodeError&) {
                stage_failed = true;
            } catch (const DomainError&) {
                stage_failed = true;
            }
            if (stage_failed) {
                ++traj_.meta.rejected_steps;
                h *= 0.25;
                continue;
            }
            using DP = DormandPrince;
            for (std::size_t i = 0; i < size_; ++i) {
                double e = 0.0;
                for (std::size_t s = 0; s < 7; ++s) e += DP::e[s] * k_[s][i];
                e *= h;
                const double sc = opts_.tol * (1.0 + std::max(std::abs(y_[i]), std::abs(ynew[i])));
                err_norm += (e / sc) * (e / sc);
            }
            err_norm = std::sqrt(err_norm / double(size_));

            if (!(err_norm <= 1.0)) {
                ++traj_.meta.rejected_steps;
                const double fac = std::isfinite(err_norm) ? std::max(0.2, 0.9 * std::pow(err_norm, -0.2)) : 0.2;
                h *= fac;
                continue;
            }

            // accepted
            const double t_new = (dir * (t1_ - (t + h)) <= 1e-15 * std::max(1.0, span)) ? t1_ : t + h;
            emit_dense(t, h, t_new);
            if (opts_.collapse_coincident && !groups_.empty()) {
                collapse(ynew);
                eval(t_new, ynew, k_[6]);
            }
            y_.swap(ynew);
            std::swap(k_[0], k_[6]);
            t = t_new;
            ++traj_.meta.accepted_steps;
            monitor(t, y_);

            const double amp = field_.amplitude(view(y_), t);
            traj_.meta.min_amplitude = std::min(traj_.meta.min_amplitude, amp);
            if (!(amp >= field_.psi().node_threshold())) {
                traj_.meta.termination = Termination::node_abort;
                break;
            }

            const double fac = err_norm == 0.0
                                   ? 5.0
                                   : std::clamp(0.9 * std::pow(err_norm, -0.17) * std::pow(err_old, 0.04), 0.2, 5.0);
            err_old = std::max(err_norm, 1e-4);
            h *= fac;
        }
        return finish(t, k_[0]);
    }

private:
    ConfigView view(const std::vector<double>& y) const { return ConfigView{y, n_, d_}; }

    void eval(double t, const std::vector<double>& y, std::vector<double>& out) {
        ++traj_.meta.field_evaluations;
        field_.velocity(view(y), t, out);
    }

    double initial_step(double span) {
        std::vector<double> y1(size_), f1(size_);
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < size_; ++i) {
            const double sc = opts_.tol * (1.0 + std::abs(y_[i]));
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (k_[0][i] / sc) * (k_[0][i] / sc);
        }
        d0 = std::sqrt(d0 / double(size_));
        d1 = std::sqrt(d1 / double(size_));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        const double dir = t1_ > t0_ ? 1.0 : -1.0;
        for (std::size_t i = 0; i < size_; ++i) y1[i] = y_[i] + dir * h0 * k_[0][i];
        double d2 = 0.0;
        try {
            eval(t0_ + dir * h0, y1, f1);
            for (std::size_t i = 0; i < size_; ++i) {
                const double sc = opts_.tol * (1.0 + std::abs(y_[i]));
                d2 += ((f1[i] - k_[0][i]) / sc) * ((f1[i] - k_[0][i]) / sc);
            }
            d2 = std::sqrt(d2 / double(size_)) / h0;
        } catch (const NodeError&) {
            return h0 * 1e-3;
        } catch (const DomainError&) {
            return h0 * 1e-3;
        }
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, span});
    }

    void stages(double t, double h, std::vector<double>& ytmp, std::vector<double>& ynew) {
        using DP = DormandPrince;
        auto combine = [&](std::initializer_list<std::pair<std::size_t, double>> terms) {
            for (std::size_t i = 0; i < size_; ++i) {
                double s = 0.0;
                for (const auto& [stage, coef] : terms) s += coef * k_[stage][i];
                ytmp[i] = y_[i] + h * s;
            }
        };
        combine({{0, DP::a21}});
        eval(t + DP::c[1] * h, ytmp, k_[1]);
        combine({{0, DP::a31}, {1, DP::a32}});
        eval(t + DP::c[2] * h, ytmp, k_[2]);
        combine({{0, DP::a41}, {1, DP::a42}, {2, DP::a43}});
        eval(t + DP::c[3] * h, ytmp, k_[3]);
        combine({{0, DP::a51}, {1, DP::a52}, {2, DP::a53}, {3, DP::a54}});
        eval(t + DP::c[4] * h, ytmp, k_[4]);
        combine({{0, DP::a61}, {1, DP::a62}, {2, DP::a63}, {3, DP::a64}, {4, DP::a65}});
        eval(t + h, ytmp, k_[5]);
        for (std::size_t i = 0; i < size_; ++i) {
            double s = 0.0;
            for (std::size_t st = 0; st < 6; ++st) s += DP::b[st] * k_[st][i];
            ynew[i] = y_[i] + h * s;
        }
        eval(t + h, ynew, k_[6]);
    }

    /// Samples the continuous extension at grid times in (t, t + h]; the endpoint t1 is left to finish().
    void emit_dense(double t, double h, double t_new) {
        using DP = DormandPrince;
        const double dir = h > 0 ? 1.0 : -1.0;
        std::vector<double> yd(size_), vd(size_);
        while (true) {
            const double ts = t0_ + dir * double(next_sample_) / opts_.cadence;
            if (dir * (ts - t_new) > 0.0) break;
            if (std::abs(ts - t1_) <= 1e-12 * std::max(1.0, std::abs(t1_))) break;
            const double th = (ts - t) / h;
            std::array<double, 7> w{}, dw{};
            for (std::size_t s = 0; s < 7; ++s) {
                const auto& p = DP::P[s];
                w[s] = th * (p[0] + th * (p[1] + th * (p[2] + th * p[3])));
                dw[s] = p[0] + th * (2.0 * p[1] + th * (3.0 * p[2] + th * 4.0 * p[3]));
            }
            for (std::size_t i = 0; i < size_; ++i) {
                double s = 0.0, ds = 0.0;
                for (std::size_t st = 0; st < 7; ++st) {
                    s += w[st] * k_[st][i];
                    ds += dw[st] * k_[st][i];
                }
                yd[i] = y_[i] + h * s;
                vd[i] = ds;
            }
            if (opts_.collapse_coincident && !groups_.empty()) collapse(yd);
            monitor(ts, yd);
            if (opts_.keep_samples) push_sample(ts, yd, vd);
            ++next_sample_;
        }
    }

    void collapse(std::vector<double>& y) const {
        for (const auto& g : groups_) {
            for (std::size_t a = 0; a < d_; ++a) {
                double mean = 0.0;
                for (std::size_t k : g) mean += y[k * d_ + a];
                mean /= double(g.size());
                for (std::size_t k : g) y[k * d_ + a] = mean;
            }
        }
    }

    double coincidence_cap() const {
        if (n_ < 2) return std::numeric_limits<double>::infinity();
        const auto cp = closest_pair(view(y_));
        if (!(cp.distance > 0.0) || cp.distance >= opts_.near_coincidence) return std::numeric_limits<double>::infinity();
        double vrel = 0.0;
        for (std::size_t a = 0; a < d_; ++a) {
            const double dv = k_[0][cp.i * d_ + a] - k_[0][cp.j * d_ + a];
            vrel += dv * dv;
        }
        vrel = std::sqrt(vrel);
        return vrel > 0.0 ? 0.1 * cp.distance / vrel : std::numeric_limits<double>::infinity();
    }

    void monitor(double t, const std::vector<double>& y) {
        if (n_ < 2) return;
        const auto v = view(y);
        const auto cp = closest_pair(v);
        if (cp.distance < traj_.meta.min_pair_distance) {
            traj_.meta.min_pair_distance = cp.distance;
            traj_.meta.min_pair_time = t;
        }
        for (const auto& g : groups_) {
            for (std::size_t a = 0; a < g.size(); ++a) {
                for (std::size_t b = a + 1; b < g.size(); ++b) {
                    traj_.meta.max_coincident_spread =
                        std::max(traj_.meta.max_coincident_spread, pair_distance(v, g[a], g[b]));
                }
            }
        }
    }

    void push_sample(double t, const std::vector<double>& y, const std::vector<double>& v) {
        traj_.samples.push_back(Sample{t, Configuration(n_, d_, y), v});
    }

    Trajectory finish(double t_end, const std::vector<double>& v_end) {
        if (traj_.samples.back().t == t_end) {
            traj_.samples.back() = Sample{t_end, Configuration(n_, d_, y_), v_end};
        } else {
            push_sample(t_end, y_, v_end);
        }
        if (!opts_.keep_samples && traj_.samples.size() > 2) {
            traj_.samples.erase(traj_.samples.begin() + 1, traj_.samples.end() - 1);
        }
        return std::move(traj_);
    }

    const GuidanceField& field_;
    IntegratorOptions opts_;
    double t0_;
    double t1_;
    std::size_t n_;
    std::size_t d_;
    std::size_t size_;
    std::vector<double> y_;
    std::array<std::vector<double>, 7> k_;
    std::vector<std::vector<std::size_t>> groups_;
    std::size_t next_sample_ = 1;
    Trajectory traj_;
};

}  // namespace detail

/**
 * Integrates dX/dt = v(X, t) from t0 to t1 (either direction).
 *
 * Throws NodeError if x0 is a node. A node reached at a step point ends the
 * run with Termination::node_abort; a step shrinking below 1e-14 |t1 - t0|
 * ends it with Termination::step_underflow. Both return the partial path.
 */
inline Trajectory integrate(const GuidanceField& field, const Configuration& x0, double t0, double t1,
                            const IntegratorOptions& opts = {}) {
    return detail::Integration(field, x0, t0, t1, opts).run();
}

inline Trajectory integrate(const PilotWave& psi, const SpeciesTable& species, const VectorPotential& a,
                            const Configuration& x0, double t0, double t1, double tol) {
    IntegratorOptions opts;
    opts.tol = tol;
    return integrate(GuidanceField(psi, species, a), x0, t0, t1, opts);
}

struct DistanceMinimum {
    double distance = 0.0;
    double time = 0.0;
};

/**
 * Smallest pair distance along the sampled path, refined between samples by
 * cubic Hermite interpolation at 1/1000 of the sample spacing.
 */
inline DistanceMinimum min_distance_monitor(const Trajectory& traj) {
    if (traj.particles < 2) throw ParameterError("min distance monitor: needs at least two particles");
    if (traj.samples.empty()) throw ParameterError("min distance monitor: empty trajectory");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const double d = detail::closest_pair(traj.samples[i].x.view()).distance;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    DistanceMinimum result{best_d, traj.samples[best].t};
    const std::size_t size = traj.particles * traj.dim;
    std::vector<double> y(size);
    auto refine = [&](const Sample& a, const Sample& b) {
        const double h = b.t - a.t;
        if (h == 0.0) return;
        const auto ya = a.x.coords();
        const auto yb = b.x.coords();
        for (int s = 1; s < 1000; ++s) {
            const double u = s / 1000.0;
            const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
            const double h10 = u * (1 - u) * (1 - u);
            const double h01 = u * u * (3 - 2 * u);
            const double h11 = u * u * (u - 1);
            for (std::size_t i = 0; i < size; ++i) {
                y[i] = h00 * ya[i] + h10 * h * a.v[i] + h01 * yb[i] + h11 * h * b.v[i];
            }
            const double d = detail::closest_pair(ConfigView{y, traj.particles, traj.dim}).distance;
            if (d < result.distance) result = {d, a.t + u * h};
        }
    };
    if (best > 0) refine(traj.samples[best - 1], traj.samples[best]);
    if (best + 1 < traj.samples.size()) refine(traj.samples[best], traj.samples[best + 1]);
    return result;
}

// ============================================================================
// CSV export
// ============================================================================

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `t,particle,axis,value`, one row per sample/particle/axis, 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool canonical = false) {
    if (canonical) os << "# canonical=true\n";
    os << "t,particle,axis,value\n";
    for (const auto& s : traj.samples) {
        const std::string ts = format_double(s.t);
        for (std::size_t k = 0; k < traj.particles; ++k) {
            for (std::size_t a = 0; a < traj.dim; ++a) {
                os << ts << ',' << k << ',' << a << ',' << format_double(s.x(k, a)) << '\n';
            }
        }
    }
}

/// Inverse of write_trajectory_csv (positions only; velocities are left empty).
inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    struct Row {
        double t;
        std::size_t k, a;
        double v;
    };
    std::vector<Row> rows;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "t,particle,axis,value") throw ParameterError("trajectory csv: unexpected header");
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string f[4];
        for (auto& field : f) {
            if (!std::getline(ls, field, ',')) throw ParameterError("trajectory csv: short row");
        }
        rows.push_back({std::stod(f[0]), std::stoul(f[1]), std::stoul(f[2]), std::stod(f[3])});
    }
    Trajectory traj;
    for (const auto& r : rows) {
        traj.particles = std::max(traj.particles, r.k + 1);
        traj.dim = std::max(traj.dim, r.a + 1);
    }
    if (rows.empty()) return traj;
    const std::size_t per = traj.particles * traj.dim;
    if (rows.size() % per != 0) throw ParameterError("trajectory csv: ragged sample block");
    for (std::size_t i = 0; i < rows.size(); i += per) {
        std::vector<double> c(per);
        for (std::size_t j = 0; j < per; ++j) c[rows[i + j].k * traj.dim + rows[i + j].a] = rows[i + j].v;
        traj.samples.push_back(Sample{rows[i].t, Configuration(traj.particles, traj.dim, std::move(c)), {}});
    }
    return traj;
}

}  // namespace pilotwave
