// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// Shared oracles and generators for the unit suites. Nothing here calls the
// analytic gradient or the integrator; the helpers only sample evaluate().

#pragma once

#include <pilotwave/pilotwave.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace pilotwave::testing {

/// Central finite differences of psi at step h, flat particle-major.
inline std::vector<Complex> finite_difference_gradient(const PilotWave& psi, const Configuration& x, double t,
                                                       double h = 1e-5) {
    std::vector<Complex> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Configuration plus = x;
        Configuration minus = x;
        plus.coords()[i] += h;
        minus.coords()[i] -= h;
        g[i] = (evaluate(psi, plus, t) - evaluate(psi, minus, t)) / (2.0 * h);
    }
    return g;
}

inline double vector_norm(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}

inline double relative_error(const std::vector<Complex>& a, const std::vector<Complex>& ref) {
    std::vector<Complex> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - ref[i];
    return vector_norm(diff) / vector_norm(ref);
}

/// Configuration with coordinates drawn from N(0, scale^2).
inline Configuration random_configuration(std::mt19937_64& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> c(n * d);
    for (auto& v : c) v = normal(rng);
    return Configuration(n, d, std::move(c));
}

/// Non-node configuration: rejects points where |psi| is below 1e-6 of its peak.
inline Configuration random_non_node(std::mt19937_64& rng, const PilotWave& psi, double t, double scale = 1.0) {
    while (true) {
        auto x = random_configuration(rng, psi.particles(), psi.dim(), scale);
        if (std::abs(evaluate(psi, x, t)) > 1e-6 * psi.peak()) return x;
    }
}

/// Ground-state oscillator function written out directly: (m w / pi)^{1/4} exp(-m w x^2 / 2).
inline double ho0(double x, double m = 1.0, double w = 1.0) {
    return std::pow(m * w / M_PI, 0.25) * std::exp(-0.5 * m * w * x * x);
}

/// First excited oscillator function: (m w / pi)^{1/4} sqrt(2 m w) x exp(-m w x^2 / 2).
inline double ho1(double x, double m = 1.0, double w = 1.0) {
    return std::pow(m * w / M_PI, 0.25) * std::sqrt(2.0 * m * w) * x * std::exp(-0.5 * m * w * x * x);
}

/// Composite Simpson rule on [a, b] with n (even) intervals.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace pilotwave::testing
