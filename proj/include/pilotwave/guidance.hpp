// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file guidance.hpp
 * @brief Guidance velocity field with minimal coupling to a vector potential.
 *
 * v_k = (Im[grad_k psi / psi] - q_k A(x_k)) / m_k, hbar = 1.
 */

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/wavefunctions.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pilotwave {

// ============================================================================
// Species
// ============================================================================

enum class Statistics { boson, fermion, anyon, distinguishable };

inline std::string to_string(Statistics s) {
    switch (s) {
        case Statistics::boson: return "boson";
        case Statistics::fermion: return "fermion";
        case Statistics::anyon: return "anyon";
        case Statistics::distinguishable: return "distinguishable";
    }
    return "unknown";
}

struct ParticleSpecies {
    double mass = 1.0;
    double charge = 0.0;
    Statistics statistics = Statistics::distinguishable;
    double nu = 0.0;    ///< anyon statistics parameter
    std::string label;  ///< name of a distinguishable particle
};

/**
 * Per-particle mass, charge and statistics.
 *
 * Particles sharing a non-distinguishable statistics tag (and the same nu for
 * anyons) form an identical group and must agree on mass and charge.
 */
class SpeciesTable {
public:
    SpeciesTable() = default;

    explicit SpeciesTable(std::vector<ParticleSpecies> particles) : particles_(std::move(particles)) {
        if (particles_.empty()) throw ParameterError("species: empty table");
        for (std::size_t i = 0; i < particles_.size(); ++i) {
            const auto& p = particles_[i];
            if (!(p.mass > 0.0) || !std::isfinite(p.mass)) {
                throw ParameterError("species: particle " + std::to_string(i) + " needs a positive mass");
            }
            if (!std::isfinite(p.charge)) throw ParameterError("species: non-finite charge");
            if (p.statistics == Statistics::anyon && !(p.nu >= 0.0 && p.nu < 2.0)) {
                throw ParameterError("species: anyon nu must lie in [0, 2)");
            }
        }
        for (std::size_t i = 0; i < particles_.size(); ++i) {
            for (std::size_t j = i + 1; j < particles_.size(); ++j) {
                if (!identical(i, j)) continue;
                if (particles_[i].mass != particles_[j].mass || particles_[i].charge != particles_[j].charge) {
                    throw ParameterError("species: identical particles " + std::to_string(i) + " and " +
                                         std::to_string(j) + " differ in mass or charge");
                }
            }
        }
    }

    /// n particles of one kind.
    static SpeciesTable uniform(std::size_t n, double mass, double charge, Statistics stats, double nu = 0.0) {
        std::vector<ParticleSpecies> v;
        for (std::size_t i = 0; i < n; ++i) {
            v.push_back({mass, charge, stats, nu,
                         stats == Statistics::distinguishable ? "p" + std::to_string(i) : std::string{}});
        }
        return SpeciesTable(std::move(v));
    }

    std::size_t size() const noexcept { return particles_.size(); }
    const ParticleSpecies& operator[](std::size_t i) const { return particles_[i]; }
    double mass(std::size_t i) const { return particles_[i].mass; }
    double charge(std::size_t i) const { return particles_[i].charge; }

    bool identical(std::size_t i, std::size_t j) const {
        const auto& a = particles_[i];
        const auto& b = particles_[j];
        if (a.statistics == Statistics::distinguishable || a.statistics != b.statistics) return false;
        return a.statistics != Statistics::anyon || a.nu == b.nu;
    }

    bool all_identical() const {
        for (std::size_t i = 1; i < particles_.size(); ++i) {
            if (!identical(0, i)) return false;
        }
        return true;
    }

    /// Checks the table against a spatial dimension (anyons need d = 2).
    void validate_dimension(std::size_t d) const {
        for (const auto& p : particles_) {
            if (p.statistics == Statistics::anyon && d != 2) throw ParameterError("species: anyons require d = 2");
        }
    }

private:
    std::vector<ParticleSpecies> particles_;
};

// ============================================================================
// Scalar gauge functions and vector potentials
// ============================================================================

/// Smooth real function of one particle position with analytic gradient.
struct ScalarField {
    std::string name;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
};

inline ScalarField make_constant_field(double c) {
    return {"constant",
            [c](std::span<const double>) { return c; },
            [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); }};
}

/// chi(x) = a . x + b
inline ScalarField make_linear_field(std::vector<double> a, double b = 0.0) {
    return {"linear",
            [a, b](std::span<const double> x) {
                double s = b;
                for (std::size_t i = 0; i < a.size() && i < x.size(); ++i) s += a[i] * x[i];
                return s;
            },
            [a](std::span<const double>, std::span<double> g) {
                for (std::size_t i = 0; i < g.size(); ++i) g[i] = i < a.size() ? a[i] : 0.0;
            }};
}

/**
 * chi = -(flux / 2 pi) * theta, theta = atan2(y - y0, x - x0).
 *
 * Its gradient cancels a flux line of the same flux away from the branch cut
 * on the negative x-axis through the line.
 */
inline ScalarField make_flux_angle_field(double flux, std::array<double, 2> position) {
    const double s = -flux / (2.0 * kPi);
    return {"flux_angle",
            [s, position](std::span<const double> x) { return s * std::atan2(x[1] - position[1], x[0] - position[0]); },
            [s, position](std::span<const double> x, std::span<double> g) {
                const double dx = x[0] - position[0];
                const double dy = x[1] - position[1];
                const double r2 = dx * dx + dy * dy;
                g[0] = -s * dy / r2;
                g[1] = s * dx / r2;
            }};
}

struct FluxLine {
    double flux = 0.0;
    std::array<double, 2> position{0.0, 0.0};
};

/**
 * Vector potential A(x): a sum of ideal flux lines (d = 2 only) and pure-gauge
 * gradient terms, times an overall sign (time reversal flips it).
 */
class VectorPotential {
public:
    VectorPotential() = default;

    static VectorPotential zero() { return {}; }

    bool is_zero() const noexcept { return lines_.empty() && gradients_.empty(); }
    const std::vector<FluxLine>& flux_lines() const noexcept { return lines_; }
    const std::vector<ScalarField>& gradient_terms() const noexcept { return gradients_; }
    double sign() const noexcept { return sign_; }

    double total_flux() const {
        double f = 0.0;
        for (const auto& l : lines_) f += l.flux;
        return sign_ * f;
    }

    /// A(pos), written to `out`; throws DomainError on a flux line.
    void evaluate(std::span<const double> pos, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& l : lines_) {
            const double dx = pos[0] - l.position[0];
            const double dy = pos[1] - l.position[1];
            const double r2 = dx * dx + dy * dy;
            if (r2 <= 1e-24) throw DomainError("vector potential: point lies on a flux line");
            const double c = l.flux / (2.0 * kPi * r2);
            out[0] += -c * dy;
            out[1] += c * dx;
        }
        std::array<double, 3> g{};
        for (const auto& chi : gradients_) {
            chi.gradient(pos, std::span<double>(g.data(), out.size()));
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
        }
        for (auto& v : out) v *= sign_;
    }

    std::vector<double> at(std::span<const double> pos) const {
        std::vector<double> a(pos.size());
        evaluate(pos, a);
        return a;
    }

    /// A + grad chi
    VectorPotential plus_gradient(ScalarField chi) const {
        VectorPotential out = *this;
        if (sign_ < 0) {
            // keep the overall sign on the flux part only
            auto f = chi;
            chi.value = [f](std::span<const double> x) { return -f.value(x); };
            chi.gradient = [f](std::span<const double> x, std::span<double> g) {
                f.gradient(x, g);
                for (auto& v : g) v = -v;
            };
        }
        out.gradients_.push_back(std::move(chi));
        return out;
    }

    /// Adds one more flux line.
    VectorPotential with_flux_line(FluxLine line) const {
        VectorPotential out = *this;
        if (sign_ < 0) line.flux = -line.flux;
        if (line.flux != 0.0) out.lines_.push_back(line);
        return out;
    }

    VectorPotential negated() const {
        VectorPotential out = *this;
        out.sign_ = -sign_;
        return out;
    }

private:
    std::vector<FluxLine> lines_;
    std::vector<ScalarField> gradients_;
    double sign_ = 1.0;
};

/// A(x) = (flux / 2 pi) (-(y - y0), x - x0) / r^2, for d = 2.
inline VectorPotential make_flux_line(double flux, std::array<double, 2> position) {
    if (!std::isfinite(flux) || !std::isfinite(position[0]) || !std::isfinite(position[1])) {
        throw ParameterError("flux line: non-finite parameters");
    }
    return VectorPotential{}.with_flux_line({flux, position});
}

// ============================================================================
// Velocity field
// ============================================================================

/// Test hook: scales the phase-gradient term of particle 0 by (1 + bias).
struct FieldPerturbation {
    double phase_gradient_bias = 0.0;
};

/**
 * Binds a pilot wave, species and vector potential into the guidance field.
 *
 * velocity() throws NodeError when |psi| is below the node threshold and
 * DomainError on singular points of A.
 */
class GuidanceField {
public:
    GuidanceField(PilotWave psi, SpeciesTable species, VectorPotential a = {}, FieldPerturbation perturb = {})
        : psi_(std::move(psi)), species_(std::move(species)), a_(std::move(a)), perturb_(perturb) {
        if (species_.size() != psi_.particles()) {
            throw ParameterError("guidance: species table has " + std::to_string(species_.size()) +
                                 " entries for " + std::to_string(psi_.particles()) + " particles");
        }
        species_.validate_dimension(psi_.dim());
        if ((!a_.flux_lines().empty()) && psi_.dim() != 2) throw ParameterError("guidance: flux lines require d = 2");
    }

    const PilotWave& psi() const noexcept { return psi_; }
    const SpeciesTable& species() const noexcept { return species_; }
    const VectorPotential& potential() const noexcept { return a_; }
    std::size_t particles() const noexcept { return psi_.particles(); }
    std::size_t dim() const noexcept { return psi_.dim(); }

    /// Writes v(x, t) to `v`; returns psi(x, t).
    Complex velocity(const ConfigView& x, double t, std::span<double> v) const {
        std::array<Complex, kMaxCoords> grad{};
        const std::size_t n = x.particles;
        const std::size_t d = x.dim;
        const Complex value = psi_.value_and_gradient(x, t, std::span<Complex>(grad.data(), n * d));
        if (!(std::abs(value) >= psi_.node_threshold())) {
            throw NodeError("guidance: configuration is a node of the pilot wave (|psi| = " +
                            std::to_string(std::abs(value)) + ")");
        }
        const Complex inv = 1.0 / value;
        std::array<double, 3> a{};
        for (std::size_t k = 0; k < n; ++k) {
            const double q = species_.charge(k);
            const double m = species_.mass(k);
            const bool coupled = q != 0.0 && !a_.is_zero();
            if (coupled) a_.evaluate(x.position(k), std::span<double>(a.data(), d));
            const double bias = k == 0 ? 1.0 + perturb_.phase_gradient_bias : 1.0;
            for (std::size_t i = 0; i < d; ++i) {
                double p = (grad[k * d + i] * inv).imag() * bias;
                if (coupled) p -= q * a[i];
                v[k * d + i] = p / m;
            }
        }
        return value;
    }

    std::vector<double> velocity(const Configuration& x, double t) const {
        psi_.check_compatible(x);
        std::vector<double> v(x.size());
        velocity(x.view(), t, v);
        return v;
    }

    double amplitude(const ConfigView& x, double t) const { return std::abs(psi_.value(x, t)); }

private:
    PilotWave psi_;
    SpeciesTable species_;
    VectorPotential a_;
    FieldPerturbation perturb_;
};

/// Velocities of all N particles, flat and particle-major.
inline std::vector<double> velocity_field(const PilotWave& psi, const SpeciesTable& species, const VectorPotential& a,
                                          const Configuration& x, double t) {
    return GuidanceField(psi, species, a).velocity(x, t);
}

// ============================================================================
// Gauge transformations
// ============================================================================

namespace detail {

/// psi * exp(i sum_k q_k chi(x_k))
class GaugeTransformedNode final : public WaveNode {
public:
    GaugeTransformedNode(PilotWave inner, std::vector<double> charges, ScalarField chi)
        : inner_(std::move(inner)), charges_(std::move(charges)), chi_(std::move(chi)) {}

    Complex value(const ConfigView& x, double t) const override { return inner_.value(x, t) * phase(x); }

    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const override {
        const Complex v = inner_.value_and_gradient(x, t, grad);
        const Complex ph = phase(x);
        std::array<double, 3> g{};
        for (std::size_t k = 0; k < x.particles; ++k) {
            chi_.gradient(x.position(k), std::span<double>(g.data(), x.dim));
            for (std::size_t a = 0; a < x.dim; ++a) {
                auto& e = grad[k * x.dim + a];
                e = (e + Complex(0.0, charges_[k] * g[a]) * v) * ph;
            }
        }
        return v * ph;
    }

    double peak() const override { return inner_.peak(); }
    double length_scale(double t) const override { return inner_.length_scale(t); }
    void center(double t, std::span<double> out) const override { inner_.node().center(t, out); }

private:
    Complex phase(const ConfigView& x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < x.particles; ++k) s += charges_[k] * chi_.value(x.position(k));
        return std::polar(1.0, s);
    }

    PilotWave inner_;
    std::vector<double> charges_;
    ScalarField chi_;
};

}  // namespace detail

struct GaugePair {
    PilotWave psi;
    VectorPotential potential;
};

/// psi' = psi exp(i sum_k q_k chi(x_k)), A' = A + grad chi; leaves the guidance field unchanged.
inline GaugePair gauge_transform(const PilotWave& psi, const SpeciesTable& species, const VectorPotential& a,
                                 const ScalarField& chi) {
    if (species.size() != psi.particles()) throw ParameterError("gauge transform: species/particle count mismatch");
    std::vector<double> q;
    for (std::size_t k = 0; k < species.size(); ++k) q.push_back(species.charge(k));
    auto node = std::make_shared<detail::GaugeTransformedNode>(psi, q, chi);
    PilotWave out(std::move(node), psi.particles(), psi.dim(), PilotWave::Structure::gauge_transformed, psi.symmetry());
    return {std::move(out), a.plus_gradient(chi)};
}

// ============================================================================
// Loop integrals
// ============================================================================

using Point2 = std::array<double, 2>;

/// Regular polygon approximating a circle, counterclockwise, closed (last vertex = first).
inline std::vector<Point2> circle_loop(Point2 center, double radius, std::size_t segments = 256) {
    std::vector<Point2> pts;
    for (std::size_t i = 0; i <= segments; ++i) {
        const double th = 2.0 * kPi * double(i % segments) / double(segments);
        pts.push_back({center[0] + radius * std::cos(th), center[1] + radius * std::sin(th)});
    }
    return pts;
}

namespace detail {

inline constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                   -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                   0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                     0.2223810344533745, 0.1012285362903763};

/// Line integral of a planar vector field along a polyline, 8-point Gauss-Legendre per segment.
template <class Field>
double polyline_integral(const std::vector<Point2>& loop, Field&& field) {
    if (loop.size() < 2) throw ParameterError("loop integral: polyline needs at least two vertices");
    double total = 0.0;
    std::vector<Point2> pts = loop;
    if (pts.front() != pts.back()) pts.push_back(pts.front());
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
        const Point2 a = pts[s];
        const Point2 b = pts[s + 1];
        const double dx = b[0] - a[0];
        const double dy = b[1] - a[1];
        double seg = 0.0;
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
            const double u = 0.5 * (kGaussNodes[q] + 1.0);
            const Point2 p{a[0] + u * dx, a[1] + u * dy};
            const Point2 f = field(p);
            seg += kGaussWeights[q] * (f[0] * dx + f[1] * dy);
        }
        total += 0.5 * seg;
    }
    return total;
}

}  // namespace detail

/// Loop integral of A along a closed polyline in the plane.
inline double loop_integral(const VectorPotential& a, const std::vector<Point2>& loop) {
    return detail::polyline_integral(loop, [&](Point2 p) {
        std::array<double, 2> v{};
        a.evaluate(p, v);
        return Point2{v[0], v[1]};
    });
}

/**
 * Circulation of the relative velocity v_1 - v_2 along a closed polyline in
 * the relative plane x_1 - x_2, at fixed centre of mass `cm`. N = 2, d = 2.
 */
inline double circulation(const GuidanceField& field, const std::vector<Point2>& loop, double t, Point2 cm = {0.0, 0.0}) {
    if (field.particles() != 2 || field.dim() != 2) throw ParameterError("circulation: needs N = 2, d = 2");
    return detail::polyline_integral(loop, [&](Point2 r) {
        const std::array<double, 4> coords{cm[0] + 0.5 * r[0], cm[1] + 0.5 * r[1], cm[0] - 0.5 * r[0],
                                           cm[1] - 0.5 * r[1]};
        std::array<double, 4> v{};
        field.velocity(ConfigView{coords, 2, 2}, t, v);
        return Point2{v[0] - v[2], v[1] - v[3]};
    });
}

inline double circulation(const PilotWave& psi, const SpeciesTable& species, const VectorPotential& a,
                          const std::vector<Point2>& loop, double t, Point2 cm = {0.0, 0.0}) {
    return circulation(GuidanceField(psi, species, a), loop, t, cm);
}

}  // namespace pilotwave
