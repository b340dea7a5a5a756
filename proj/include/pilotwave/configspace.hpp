// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file configspace.hpp
 * @brief The quotient R^{Nd}/S_N: canonical representatives, the coincidence set and lifts.
 */

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/integrator.hpp>
#include <pilotwave/permutation.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace pilotwave {

/// Default pair distance below which two particles count as coincident.
inline constexpr double kCoincidenceThreshold = 1e-8;

/// Point of the reduced configuration space, stored as its canonical representative.
struct ReducedPoint {
    Configuration representative;

    bool operator==(const ReducedPoint&) const = default;
};

/// Ordering of particle labels that sorts positions lexicographically (stable on exact ties).
inline Permutation canonical_order(const ConfigView& x) {
    std::vector<std::size_t> order(x.particles);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto a = x.position(i);
        const auto b = x.position(j);
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    // particle order[r] moves to slot r
    std::vector<std::size_t> img(x.particles);
    for (std::size_t r = 0; r < order.size(); ++r) img[order[r]] = r;
    return Permutation::from_zero_based(std::move(img));
}

/// Particles sorted lexicographically by coordinates; idempotent and permutation invariant.
inline ReducedPoint reduced_representative(const Configuration& x) {
    return ReducedPoint{apply(canonical_order(x.view()), x)};
}

/// Smallest Euclidean distance over particle pairs; 0 exactly on the coincidence set.
inline double min_pairwise_distance(const Configuration& x) {
    if (x.particles() < 2) throw ParameterError("min pairwise distance: needs at least two particles");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.particles(); ++i) {
        for (std::size_t j = i + 1; j < x.particles(); ++j) best = std::min(best, pair_distance(x.view(), i, j));
    }
    return best;
}

/// Applies P to every sample (positions and velocities).
inline Trajectory permute_trajectory(const Permutation& p, const Trajectory& traj) {
    Trajectory out;
    out.particles = traj.particles;
    out.dim = traj.dim;
    out.meta = traj.meta;
    out.samples.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        Sample ps{s.t, apply(p, s.x), {}};
        if (!s.v.empty()) ps.v = apply_flat<double>(p, s.v, traj.dim);
        out.samples.push_back(std::move(ps));
    }
    return out;
}

/// Canonicalises every sample; the result may jump where the sort order changes.
inline Trajectory reduced_trajectory(const Trajectory& traj) {
    Trajectory out;
    out.particles = traj.particles;
    out.dim = traj.dim;
    out.meta = traj.meta;
    for (const auto& s : traj.samples) {
        const auto p = canonical_order(s.x.view());
        Sample ps{s.t, apply(p, s.x), {}};
        if (!s.v.empty()) ps.v = apply_flat<double>(p, s.v, traj.dim);
        out.samples.push_back(std::move(ps));
    }
    return out;
}

struct LiftResult {
    std::vector<Trajectory> lifts;
    std::vector<Permutation> permutations;
    bool degenerate = false;  ///< a sample lies on the coincidence set; equal lifts were merged
    std::string warning;
};

/**
 * The N! full-space curves over a reduced trajectory, one per relabelling.
 * N <= 6. Lifts that coincide sample-for-sample are merged and flagged.
 */
inline LiftResult lift_trajectory(const Trajectory& traj, double coincidence = kCoincidenceThreshold) {
    if (traj.particles > 6) throw CapabilityError("lift trajectory: capped at N = 6 (720 curves)");
    LiftResult out;
    for (const auto& s : traj.samples) {
        if (traj.particles >= 2 && min_pairwise_distance(s.x) < coincidence) {
            out.degenerate = true;
            out.warning = "trajectory touches the coincidence set at t = " + format_double(s.t) + "; lifts merged";
            break;
        }
    }
    for (const auto& p : all_permutations(traj.particles)) {
        auto lifted = permute_trajectory(p, traj);
        bool duplicate = false;
        if (out.degenerate) {
            for (const auto& existing : out.lifts) {
                bool same = true;
                for (std::size_t i = 0; i < existing.samples.size() && same; ++i) {
                    same = existing.samples[i].x == lifted.samples[i].x;
                }
                if (same) {
                    duplicate = true;
                    break;
                }
            }
        }
        if (duplicate) continue;
        out.lifts.push_back(std::move(lifted));
        out.permutations.push_back(p);
    }
    return out;
}

/// Largest coordinate difference between two trajectories over their common samples.
inline double trajectory_mismatch(const Trajectory& a, const Trajectory& b, double until = std::numeric_limits<double>::infinity()) {
    double m = 0.0;
    const std::size_t n = std::min(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(a.samples[i].t - a.samples.front().t) > until) break;
        m = std::max(m, max_abs_difference(a.samples[i].x.coords(), b.samples[i].x.coords()));
    }
    return m;
}

namespace detail {

inline bool segments_intersect(const double* p1, const double* p2, const double* q1, const double* q2) {
    auto cross = [](const double* o, const double* a, const double* b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    // c lies on segment ab, given that the three points are collinear
    auto within = [](const double* a, const double* b, const double* c) {
        return std::min(a[0], b[0]) <= c[0] && c[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= c[1] &&
               c[1] <= std::max(a[1], b[1]);
    };
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    return (d1 == 0 && within(q1, q2, p1)) || (d2 == 0 && within(q1, q2, p2)) || (d3 == 0 && within(p1, p2, q1)) ||
           (d4 == 0 && within(p1, p2, q2));
}

}  // namespace detail

struct CrossingReport {
    bool crossed = false;
    std::size_t i = 0;
    std::size_t j = 0;
    double time = 0.0;
};

/**
 * Physical-space crossing of two particle paths.
 *
 * d = 1: the ordering of some pair flips between samples (or they meet);
 *        the time is interpolated linearly.
 * d = 2: the planar paths of some pair intersect, at any pair of times.
 * d = 3: some pair comes within the coincidence threshold at the same time.
 */
inline CrossingReport detect_crossing(const Trajectory& traj, double coincidence = kCoincidenceThreshold) {
    CrossingReport r;
    const auto& s = traj.samples;
    for (std::size_t i = 0; i < traj.particles; ++i) {
        for (std::size_t j = i + 1; j < traj.particles; ++j) {
            if (traj.dim == 1) {
                for (std::size_t n = 0; n + 1 < s.size(); ++n) {
                    const double a = s[n].x(i, 0) - s[n].x(j, 0);
                    const double b = s[n + 1].x(i, 0) - s[n + 1].x(j, 0);
                    if (a == 0.0) return {true, i, j, s[n].t};
                    if (b == 0.0 || (a > 0) != (b > 0)) {
                        return {true, i, j, s[n].t + a / (a - b) * (s[n + 1].t - s[n].t)};
                    }
                }
            } else if (traj.dim == 2) {
                for (std::size_t n = 0; n + 1 < s.size(); ++n) {
                    const double* p1 = s[n].x.position(i).data();
                    const double* p2 = s[n + 1].x.position(i).data();
                    for (std::size_t m = 0; m + 1 < s.size(); ++m) {
                        if (detail::segments_intersect(p1, p2, s[m].x.position(j).data(), s[m + 1].x.position(j).data())) {
                            return {true, i, j, s[n + 1].t};
                        }
                    }
                }
            } else {
                for (const auto& smp : s) {
                    if (pair_distance(smp.x.view(), i, j) < coincidence) return {true, i, j, smp.t};
                }
            }
        }
    }
    return r;
}

}  // namespace pilotwave
