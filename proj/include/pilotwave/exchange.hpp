// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file exchange.hpp
 * @brief (Anti)symmetrisation, exchange phases and the label-blind detection density.
 */

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/guidance.hpp>
#include <pilotwave/permutation.hpp>
#include <pilotwave/wavefunctions.hpp>

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pilotwave {

inline constexpr std::size_t kMaxEnumeratedParticles = 8;

namespace detail {

inline PilotWave build_symmetrized(const PilotWave& product, int sign) {
    const char* what = sign > 0 ? "symmetrize" : "antisymmetrize";
    if (product.structure() != PilotWave::Structure::product) {
        throw ParameterError(std::string(what) + ": argument must be a plain product state");
    }
    const auto& states = product.constituents();
    if (states.size() > kMaxEnumeratedParticles) {
        throw CapabilityError(std::string(what) + ": N! enumeration capped at N = 8");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = i; j < states.size(); ++j) {
            const Complex ov = overlap(states[i], states[j]);
            const double expected = i == j ? 1.0 : 0.0;
            if (std::abs(ov - expected) > 1e-6) {
                if (sign < 0 && i != j && std::abs(std::abs(ov) - 1.0) <= 1e-6) {
                    throw ZeroFunctionError("antisymmetrize: constituents " + std::to_string(i) + " and " +
                                            std::to_string(j) + " coincide; the determinant vanishes");
                }
                throw PreconditionError(std::string(what) + ": constituents are not orthonormal (<" +
                                        std::to_string(i) + "|" + std::to_string(j) +
                                        "> = " + std::to_string(std::abs(ov)) + ")");
            }
        }
    }
    if (states.size() == 1) return product;
    auto node = std::make_shared<SymmetrizedNode>(states, sign);
    return PilotWave(std::move(node), product.particles(), product.dim(),
                     sign > 0 ? PilotWave::Structure::symmetrized : PilotWave::Structure::antisymmetrized,
                     sign > 0 ? SymmetryTag::symmetric() : SymmetryTag::antisymmetric(), states);
}

}  // namespace detail

/// (N!)^{-1/2} sum_P prod_k phi_k(x_{P^-1 k}); constituents must be orthonormal to 1e-6.
inline PilotWave symmetrize(const PilotWave& product) { return detail::build_symmetrized(product, +1); }

/// (N!)^{-1/2} sum_P sign(P) prod_k phi_k(x_{P^-1 k}); equal constituents raise ZeroFunctionError.
inline PilotWave antisymmetrize(const PilotWave& product) { return detail::build_symmetrized(product, -1); }

namespace detail {

/// Continuous phase of psi along a relative-plane polyline at fixed centre of mass.
/// The phase gradient is integrated rather than differencing arg(psi), so a
/// branch cut in the stored representation does not register.
inline Complex accumulate_relative_phase(const PilotWave& psi, const std::vector<Point2>& path, Point2 cm, double t) {
    auto config = [&](Point2 r) {
        return std::array<double, 4>{cm[0] + 0.5 * r[0], cm[1] + 0.5 * r[1], cm[0] - 0.5 * r[0], cm[1] - 0.5 * r[1]};
    };
    // d(arg psi)/dr = Im(grad_1 psi - grad_2 psi) / (2 psi)
    auto phase_gradient = [&](Point2 r) {
        const auto c = config(r);
        std::array<Complex, 4> g{};
        const Complex v = psi.value_and_gradient(ConfigView{c, 2, 2}, t, g);
        if (!(std::abs(v) >= psi.node_threshold())) throw NodeError("exchange phase: exchange path crosses a node");
        return Point2{0.5 * ((g[0] - g[2]) / v).imag(), 0.5 * ((g[1] - g[3]) / v).imag()};
    };
    auto modulus = [&](Point2 r) {
        const auto c = config(r);
        return std::abs(psi.value(ConfigView{c, 2, 2}, t));
    };
    constexpr double kMaxAngleStep = kPi / 16.0;
    std::vector<Point2> fine{path.front()};
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const Point2 a = path[s];
        const Point2 b = path[s + 1];
        // angle subtended at the coincidence point bounds the substep count
        const double ra = std::hypot(a[0], a[1]);
        const double rb = std::hypot(b[0], b[1]);
        double sweep = 0.0;
        if (ra > 0.0 && rb > 0.0) {
            sweep = std::abs(std::remainder(std::atan2(b[1], b[0]) - std::atan2(a[1], a[0]), 2.0 * kPi));
        }
        const std::size_t sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(sweep / kMaxAngleStep)) * 4);
        for (std::size_t i = 1; i <= sub; ++i) {
            const double u = double(i) / double(sub);
            fine.push_back({a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])});
        }
    }
    double phase = 0.0;
    for (std::size_t s = 0; s + 1 < fine.size(); ++s) {
        const Point2 a = fine[s];
        const Point2 b = fine[s + 1];
        double seg = 0.0;
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
            const double u = 0.5 * (kGaussNodes[q] + 1.0);
            const Point2 g = phase_gradient({a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])});
            seg += kGaussWeights[q] * (g[0] * (b[0] - a[0]) + g[1] * (b[1] - a[1]));
        }
        phase += 0.5 * seg;
    }
    const double m0 = modulus(path.front());
    const double m1 = modulus(path.back());
    if (!(m0 >= psi.node_threshold()) || !(m1 >= psi.node_threshold())) {
        throw NodeError("exchange phase: exchange path ends on a node");
    }
    return std::polar(m1 / m0, phase);
}

}  // namespace detail

/**
 * psi(P x, t) / psi(x, t).
 *
 * For anyonic states the ratio depends on the exchange path: supply `path`,
 * a polyline in the relative plane x_1 - x_2 running from the relative
 * coordinate of x to that of P x, with the centre of mass held fixed. The
 * phase is then accumulated continuously along it.
 */
inline Complex exchange_phase(const PilotWave& psi, const Configuration& x, const Permutation& p, double t,
                              const std::optional<std::vector<Point2>>& path = std::nullopt) {
    psi.check_compatible(x);
    if (p.size() != x.particles()) throw ParameterError("exchange phase: permutation size mismatch");
    const Complex base = psi.value(x, t);
    if (!(std::abs(base) >= psi.node_threshold())) throw NodeError("exchange phase: x is a node of the pilot wave");
    const bool anyonic = psi.symmetry().kind == SymmetryKind::anyonic;
    if (!path) {
        if (anyonic && !p.is_identity()) {
            throw ParameterError("exchange phase: anyonic states need an exchange path");
        }
        return psi.value(apply(p, x), t) / base;
    }
    if (x.particles() != 2 || x.dim() != 2) throw ParameterError("exchange phase: paths are defined for N = 2, d = 2");
    if (path->size() < 2) throw ParameterError("exchange phase: path needs at least two vertices");
    const Configuration target = apply(p, x);
    const Point2 cm{0.5 * (x(0, 0) + x(1, 0)), 0.5 * (x(0, 1) + x(1, 1))};
    const Point2 r0{x(0, 0) - x(1, 0), x(0, 1) - x(1, 1)};
    const Point2 r1{target(0, 0) - target(1, 0), target(0, 1) - target(1, 1)};
    const double scale = std::max(1.0, std::hypot(r0[0], r0[1]));
    auto close = [&](Point2 a, Point2 b) { return std::hypot(a[0] - b[0], a[1] - b[1]) <= 1e-9 * scale; };
    if (!close(path->front(), r0) || !close(path->back(), r1)) {
        throw ParameterError("exchange phase: path must run from the relative coordinate of x to that of P x");
    }
    return detail::accumulate_relative_phase(psi, *path, cm, t);
}

/// Counterclockwise half-circle in the relative plane from r to -r.
inline std::vector<Point2> semicircle_exchange_path(Point2 r, std::size_t segments = 64) {
    const double radius = std::hypot(r[0], r[1]);
    const double start = std::atan2(r[1], r[0]);
    std::vector<Point2> pts;
    for (std::size_t i = 0; i <= segments; ++i) {
        const double th = start + kPi * double(i) / double(segments);
        pts.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    pts.back() = {-r[0], -r[1]};
    return pts;
}

/// sum over all N! relabellings of |psi(P x, t)|^2; N <= 8.
inline double detection_probability_density(const PilotWave& psi, const Configuration& x, double t) {
    psi.check_compatible(x);
    if (x.particles() > kMaxEnumeratedParticles) {
        throw CapabilityError("detection density: N! enumeration capped at N = 8");
    }
    double sum = 0.0;
    for (const auto& p : all_permutations(x.particles())) sum += std::norm(psi.value(apply(p, x), t));
    return sum;
}

}  // namespace pilotwave
