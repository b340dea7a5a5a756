// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file wavefunctions.hpp
 * @brief Analytic pilot waves with exact values and gradients.
 *
 * Every catalogue state is built from one-dimensional axis factors (free
 * Gaussian packets and Hermite functions), except the two-anyon relative
 * state which lives in centre-of-mass / relative coordinates. A PilotWave is
 * an immutable handle to a shared node tree; evaluation is const and safe to
 * call concurrently.
 *
 * Gradients are returned flat, particle-major: entry k*d + a is d psi / d x_{k,a}.
 */

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/permutation.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pilotwave {

// ============================================================================
// Symmetry tags
// ============================================================================

enum class SymmetryKind { none, symmetric, antisymmetric, anyonic };

struct SymmetryTag {
    SymmetryKind kind = SymmetryKind::none;
    double nu = 0.0;  ///< statistics parameter, meaningful for anyonic only

    static SymmetryTag none() { return {}; }
    static SymmetryTag symmetric() { return {SymmetryKind::symmetric, 0.0}; }
    static SymmetryTag antisymmetric() { return {SymmetryKind::antisymmetric, 0.0}; }
    static SymmetryTag anyonic(double nu) { return {SymmetryKind::anyonic, nu}; }

    bool operator==(const SymmetryTag& o) const {
        return kind == o.kind && (kind != SymmetryKind::anyonic || nu == o.nu);
    }

    std::string to_string() const {
        switch (kind) {
            case SymmetryKind::none: return "none";
            case SymmetryKind::symmetric: return "symmetric";
            case SymmetryKind::antisymmetric: return "antisymmetric";
            case SymmetryKind::anyonic: return "anyonic(" + std::to_string(nu) + ")";
        }
        return "unknown";
    }
};

// ============================================================================
// One-dimensional building blocks
// ============================================================================

/**
 * A normalised function of one coordinate with closed-form time dependence.
 *
 * gaussian: freely spreading packet of mass m,
 *   f(x,t) = (2 pi s^2)^(-1/4) a^(-1/2) exp(-(x-c-pt/m)^2 / (4 s^2 a) + i p (x-c) - i p^2 t / 2m),
 *   a = 1 + i t / (2 m s^2).
 * hermite: oscillator eigenfunction of level n, frequency w and mass m with phase e^{-i (n+1/2) w t}.
 */
struct AxisFactor {
    enum class Kind { gaussian, hermite };

    Kind kind = Kind::gaussian;
    double center = 0.0;
    double momentum = 0.0;
    double width = 1.0;
    double mass = 1.0;
    int level = 0;
    double frequency = 1.0;

    /// Position-space profile at time t; the derivative is written to `deriv`.
    Complex value_and_derivative(double x, double t, Complex& deriv) const {
        if (kind == Kind::gaussian) {
            const Complex a(1.0, t / (2.0 * mass * width * width));
            const double shifted = x - center - momentum * t / mass;
            const Complex inv_a = 1.0 / a;
            const Complex exponent = -shifted * shifted * inv_a / (4.0 * width * width) +
                                     Complex(0.0, momentum * (x - center) -
                                                      momentum * momentum * t / (2.0 * mass));
            const double pref = std::pow(2.0 * kPi * width * width, -0.25);
            const Complex v = pref / std::sqrt(a) * std::exp(exponent);
            deriv = v * (-shifted * inv_a / (2.0 * width * width) + Complex(0.0, momentum));
            return v;
        }
        const double scale = std::sqrt(mass * frequency);
        const double xi = scale * x;
        double h_prev = 0.0;
        double h = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
        for (int n = 0; n < level; ++n) {
            const double next = std::sqrt(2.0 / (n + 1)) * xi * h - std::sqrt(double(n) / (n + 1)) * h_prev;
            h_prev = h;
            h = next;
        }
        const double dh = std::sqrt(2.0 * level) * h_prev - xi * h;
        const double norm = std::sqrt(scale);
        const Complex phase = std::polar(1.0, -(level + 0.5) * frequency * t);
        deriv = phase * (norm * scale * dh);
        return phase * (norm * h);
    }

    Complex value(double x, double t) const {
        Complex d;
        return value_and_derivative(x, t, d);
    }

    /// Characteristic length: packet width or oscillator length.
    double length() const { return kind == Kind::gaussian ? width : 1.0 / std::sqrt(mass * frequency); }

    double length_at(double t) const {
        if (kind == Kind::hermite) return length();
        const double spread = t / (2.0 * mass * width * width);
        return width * std::sqrt(1.0 + spread * spread);
    }

    double center_at(double t) const { return kind == Kind::gaussian ? center + momentum * t / mass : 0.0; }

    /// Global maximum of |f| over x and t.
    double peak() const {
        if (kind == Kind::gaussian) return std::pow(2.0 * kPi * width * width, -0.25);
        const double reach = std::sqrt(2.0 * level + 1.0) + 2.0;
        double best = 0.0;
        const int n = 4096;
        for (int i = 0; i <= n; ++i) {
            const double x = length() * (-reach + 2.0 * reach * i / n);
            best = std::max(best, std::abs(value(x, 0.0)));
        }
        return best * (1.0 + 1e-3);
    }
};

/// Quadrature box of the 1-D overlap integrals: half-width multiplier and point count.
struct QuadratureBox {
    double half_width_lengths = 12.0;
    std::size_t points = 1024;
};

/// <f|g> at t = 0 by the trapezoid rule over a box spanning both factors.
inline Complex overlap(const AxisFactor& f, const AxisFactor& g, const QuadratureBox& box = {}) {
    const double len = std::max(f.length(), g.length());
    const double lo = std::min(f.center_at(0.0), g.center_at(0.0)) - box.half_width_lengths * len;
    const double hi = std::max(f.center_at(0.0), g.center_at(0.0)) + box.half_width_lengths * len;
    const double h = (hi - lo) / double(box.points - 1);
    Complex sum = 0.0;
    for (std::size_t i = 0; i < box.points; ++i) {
        const double x = lo + h * double(i);
        const double w = (i == 0 || i + 1 == box.points) ? 0.5 : 1.0;
        sum += w * std::conj(f.value(x, 0.0)) * g.value(x, 0.0);
    }
    return sum * h;
}

// ============================================================================
// Single-particle states
// ============================================================================

class SingleParticleState {
public:
    enum class Kind { gaussian_packet, oscillator_eigenstate };

    SingleParticleState(Kind kind, std::vector<AxisFactor> axes) : kind_(kind), axes_(std::move(axes)) {
        peak_ = 1.0;
        for (const auto& a : axes_) peak_ *= a.peak();
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return axes_.size(); }
    std::span<const AxisFactor> axes() const noexcept { return axes_; }
    double mass() const noexcept { return axes_.front().mass; }

    Complex value(std::span<const double> pos, double t) const {
        Complex v = 1.0;
        for (std::size_t a = 0; a < axes_.size(); ++a) v *= axes_[a].value(pos[a], t);
        return v;
    }

    Complex value_and_gradient(std::span<const double> pos, double t, std::span<Complex> grad) const {
        std::array<Complex, 3> f{};
        std::array<Complex, 3> df{};
        for (std::size_t a = 0; a < axes_.size(); ++a) f[a] = axes_[a].value_and_derivative(pos[a], t, df[a]);
        Complex v = 1.0;
        for (std::size_t a = 0; a < axes_.size(); ++a) v *= f[a];
        for (std::size_t a = 0; a < axes_.size(); ++a) {
            Complex g = df[a];
            for (std::size_t b = 0; b < axes_.size(); ++b) {
                if (b != a) g *= f[b];
            }
            grad[a] = g;
        }
        return v;
    }

    double peak() const noexcept { return peak_; }

    double length_scale(double t) const {
        double l = 0.0;
        for (const auto& a : axes_) l = std::max(l, a.length_at(t));
        return l;
    }

    std::vector<double> center(double t) const {
        std::vector<double> c;
        for (const auto& a : axes_) c.push_back(a.center_at(t));
        return c;
    }

    std::string describe() const {
        if (kind_ == Kind::gaussian_packet) return "gaussian_packet";
        std::string s = "oscillator(";
        for (std::size_t a = 0; a < axes_.size(); ++a) s += (a ? "," : "") + std::to_string(axes_[a].level);
        return s + ")";
    }

private:
    Kind kind_;
    std::vector<AxisFactor> axes_;
    double peak_ = 1.0;
};

/// Free Gaussian packet phi(x,0) = (2 pi s^2)^(-d/4) exp(-|x-c|^2/(4 s^2) + i p.(x-c)) evolving with `mass`.
inline SingleParticleState make_gaussian_packet(const std::vector<double>& center, const std::vector<double>& momentum,
                                                double width, double mass = 1.0) {
    if (!(width > 0.0) || !std::isfinite(width)) throw ParameterError("gaussian packet: width must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ParameterError("gaussian packet: mass must be positive");
    if (center.empty() || center.size() > 3) throw ParameterError("gaussian packet: dimension must be 1, 2 or 3");
    if (momentum.size() != center.size()) throw ParameterError("gaussian packet: momentum and center differ in dimension");
    std::vector<AxisFactor> axes;
    for (std::size_t a = 0; a < center.size(); ++a) {
        if (!std::isfinite(center[a]) || !std::isfinite(momentum[a])) {
            throw ParameterError("gaussian packet: non-finite center or momentum");
        }
        AxisFactor f;
        f.kind = AxisFactor::Kind::gaussian;
        f.center = center[a];
        f.momentum = momentum[a];
        f.width = width;
        f.mass = mass;
        axes.push_back(f);
    }
    return SingleParticleState(SingleParticleState::Kind::gaussian_packet, std::move(axes));
}

/// Hermite-function eigenstate, one level per axis; energy sum (n_i + 1/2) w.
inline SingleParticleState make_oscillator_eigenstate(const std::vector<int>& levels, double frequency, double mass) {
    if (levels.empty() || levels.size() > 3) throw ParameterError("oscillator: dimension must be 1, 2 or 3");
    if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ParameterError("oscillator: frequency must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ParameterError("oscillator: mass must be positive");
    std::vector<AxisFactor> axes;
    for (int n : levels) {
        if (n < 0) throw ParameterError("oscillator: negative level");
        if (n > 200) throw ParameterError("oscillator: level above 200 unsupported");
        AxisFactor f;
        f.kind = AxisFactor::Kind::hermite;
        f.level = n;
        f.frequency = frequency;
        f.mass = mass;
        axes.push_back(f);
    }
    return SingleParticleState(SingleParticleState::Kind::oscillator_eigenstate, std::move(axes));
}

/// <a|b> at t = 0, one 1-D quadrature per axis.
inline Complex overlap(const SingleParticleState& a, const SingleParticleState& b, const QuadratureBox& box = {}) {
    if (a.dim() != b.dim()) throw ParameterError("overlap: dimension mismatch");
    Complex s = 1.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s *= overlap(a.axes()[i], b.axes()[i], box);
    return s;
}

// ============================================================================
// Pilot-wave node tree
// ============================================================================

struct AnyonPairParams {
    double nu = 0.0;
    int k = 0;
    double frequency = 1.0;
    double mass = 1.0;

    double ell() const { return nu + 2.0 * k; }
    double reduced_mass() const { return 0.5 * mass; }
    double total_mass() const { return 2.0 * mass; }
};

namespace detail {

/// One product-of-axis-factors term of a separable expansion (N*d factors, particle-major).
struct SeparableTerm {
    Complex coef;
    std::vector<const AxisFactor*> factors;
};

class WaveNode {
public:
    virtual ~WaveNode() = default;
    virtual Complex value(const ConfigView& x, double t) const = 0;
    virtual Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const = 0;
    /// Upper estimate of max |psi| over configuration space and time.
    virtual double peak() const = 0;
    virtual double length_scale(double t) const = 0;
    virtual void center(double t, std::span<double> out) const = 0;
    /// Appends scale * (this state) as separable terms; false if not separable.
    virtual bool separable(std::vector<SeparableTerm>&, Complex) const { return false; }
    /// Appends scale * (this state) as anyon-pair components; false if not an anyon expansion.
    virtual bool anyon_expansion(std::vector<std::pair<Complex, AnyonPairParams>>&, Complex) const { return false; }
};

}  // namespace detail

/**
 * Immutable handle to an analytic pilot wave.
 *
 * Holds particle count, dimension, structure kind and symmetry tag alongside
 * the shared evaluation tree. Copies share the tree.
 */
class PilotWave {
public:
    enum class Structure {
        product,
        symmetrized,
        antisymmetrized,
        anyon_pair,
        superposition,
        time_reversed,
        gauge_transformed
    };

    PilotWave(std::shared_ptr<const detail::WaveNode> node, std::size_t particles, std::size_t dim,
              Structure structure, SymmetryTag tag, std::vector<SingleParticleState> constituents = {},
              std::optional<AnyonPairParams> anyon = std::nullopt)
        : node_(std::move(node)),
          particles_(particles),
          dim_(dim),
          structure_(structure),
          tag_(tag),
          constituents_(std::move(constituents)),
          anyon_(anyon) {
        node_threshold_ = 1e-12 * node_->peak();
    }

    std::size_t particles() const noexcept { return particles_; }
    std::size_t dim() const noexcept { return dim_; }
    Structure structure() const noexcept { return structure_; }
    const SymmetryTag& symmetry() const noexcept { return tag_; }

    /// Single-particle factors for product and (anti)symmetrised structures.
    const std::vector<SingleParticleState>& constituents() const noexcept { return constituents_; }
    const std::optional<AnyonPairParams>& anyon_params() const noexcept { return anyon_; }

    /// |psi| below this value counts as a node.
    double node_threshold() const noexcept { return node_threshold_; }
    double peak() const { return node_->peak(); }
    double length_scale(double t) const { return node_->length_scale(t); }

    std::vector<double> center(double t) const {
        std::vector<double> c(particles_ * dim_, 0.0);
        node_->center(t, c);
        return c;
    }

    void check_compatible(const ConfigView& x) const {
        if (x.particles != particles_ || x.dim != dim_) {
            throw ParameterError("pilot wave of N=" + std::to_string(particles_) + ", d=" + std::to_string(dim_) +
                                 " evaluated at N=" + std::to_string(x.particles) + ", d=" + std::to_string(x.dim));
        }
    }

    Complex value(const ConfigView& x, double t) const { return node_->value(x, t); }
    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const {
        return node_->value_and_gradient(x, t, grad);
    }

    const detail::WaveNode& node() const noexcept { return *node_; }
    std::shared_ptr<const detail::WaveNode> node_ptr() const noexcept { return node_; }

private:
    std::shared_ptr<const detail::WaveNode> node_;
    std::size_t particles_;
    std::size_t dim_;
    Structure structure_;
    SymmetryTag tag_;
    std::vector<SingleParticleState> constituents_;
    std::optional<AnyonPairParams> anyon_;
    double node_threshold_ = 0.0;
};

inline std::string to_string(PilotWave::Structure s) {
    switch (s) {
        case PilotWave::Structure::product: return "product";
        case PilotWave::Structure::symmetrized: return "symmetrized";
        case PilotWave::Structure::antisymmetrized: return "antisymmetrized";
        case PilotWave::Structure::anyon_pair: return "anyon_pair";
        case PilotWave::Structure::superposition: return "superposition";
        case PilotWave::Structure::time_reversed: return "time_reversed";
        case PilotWave::Structure::gauge_transformed: return "gauge_transformed";
    }
    return "unknown";
}

// ============================================================================
// Node implementations
// ============================================================================

namespace detail {

class ProductNode final : public WaveNode {
public:
    explicit ProductNode(std::vector<SingleParticleState> states) : states_(std::move(states)) {}

    Complex value(const ConfigView& x, double t) const override {
        Complex v = 1.0;
        for (std::size_t k = 0; k < states_.size(); ++k) v *= states_[k].value(x.position(k), t);
        return v;
    }

    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const override {
        const std::size_t n = states_.size();
        const std::size_t d = x.dim;
        std::array<Complex, kMaxParticles> f{};
        for (std::size_t k = 0; k < n; ++k) f[k] = states_[k].value_and_gradient(x.position(k), t, grad.subspan(k * d, d));
        // prefix/suffix products keep the gradient exact at nodes of individual factors
        std::array<Complex, kMaxParticles + 1> pre{};
        std::array<Complex, kMaxParticles + 1> suf{};
        pre[0] = 1.0;
        for (std::size_t k = 0; k < n; ++k) pre[k + 1] = pre[k] * f[k];
        suf[n] = 1.0;
        for (std::size_t k = n; k-- > 0;) suf[k] = suf[k + 1] * f[k];
        for (std::size_t k = 0; k < n; ++k) {
            const Complex others = pre[k] * suf[k + 1];
            for (std::size_t a = 0; a < d; ++a) grad[k * d + a] *= others;
        }
        return pre[n];
    }

    double peak() const override {
        double p = 1.0;
        for (const auto& s : states_) p *= s.peak();
        return p;
    }

    double length_scale(double t) const override {
        double l = 0.0;
        for (const auto& s : states_) l = std::max(l, s.length_scale(t));
        return l;
    }

    void center(double t, std::span<double> out) const override {
        const std::size_t d = states_.front().dim();
        for (std::size_t k = 0; k < states_.size(); ++k) {
            const auto c = states_[k].center(t);
            std::copy(c.begin(), c.end(), out.begin() + std::ptrdiff_t(k * d));
        }
    }

    bool separable(std::vector<SeparableTerm>& out, Complex scale) const override {
        SeparableTerm term{scale, {}};
        for (const auto& s : states_) {
            for (const auto& a : s.axes()) term.factors.push_back(&a);
        }
        out.push_back(std::move(term));
        return true;
    }

private:
    std::vector<SingleParticleState> states_;
};

/// (N!)^{-1/2} sum_P (sign)^P prod_k phi_k(x_{P^-1 k}) for orthonormal phi_k.
class SymmetrizedNode final : public WaveNode {
public:
    SymmetrizedNode(std::vector<SingleParticleState> states, int sign) : states_(std::move(states)), sign_(sign) {
        const std::size_t n = states_.size();
        for (const auto& p : all_permutations(n)) {
            for (std::size_t k = 0; k < n; ++k) perms_.push_back(static_cast<std::uint8_t>(p(k)));
            signs_.push_back(sign_ < 0 ? p.parity() : 1);
        }
        double fact = 1.0;
        for (std::size_t i = 2; i <= n; ++i) fact *= double(i);
        norm_ = 1.0 / std::sqrt(fact);
    }

    // Both evaluations work on the lexicographically sorted configuration, so
    // relabelled inputs go through the identical floating-point sum.
    Complex value(const ConfigView& x, double t) const override {
        const std::size_t n = states_.size();
        std::array<std::uint8_t, kMaxParticles> slot{};
        const double parity = sorted_slots(x, slot);
        std::array<Complex, kMaxParticles * kMaxParticles> m{};
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) m[k * n + j] = states_[k].value(x.position(slot[j]), t);
        }
        Complex sum = 0.0;
        for (std::size_t p = 0; p < signs_.size(); ++p) {
            const std::uint8_t* sigma = &perms_[p * n];
            Complex term = double(signs_[p]);
            for (std::size_t k = 0; k < n; ++k) term *= m[k * n + sigma[k]];
            sum += term;
        }
        return parity * norm_ * sum;
    }

    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const override {
        const std::size_t n = states_.size();
        const std::size_t d = x.dim;
        std::array<std::uint8_t, kMaxParticles> slot{};
        const double parity = sorted_slots(x, slot);
        std::vector<Complex> m(n * n);
        std::vector<Complex> g(n * n * d);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                m[k * n + j] = states_[k].value_and_gradient(x.position(slot[j]), t,
                                                             std::span<Complex>(g).subspan((k * n + j) * d, d));
            }
        }
        std::fill(grad.begin(), grad.end(), Complex(0.0));
        std::array<Complex, kMaxParticles + 1> pre{};
        std::array<Complex, kMaxParticles + 1> suf{};
        Complex sum = 0.0;
        for (std::size_t p = 0; p < signs_.size(); ++p) {
            const std::uint8_t* sigma = &perms_[p * n];
            pre[0] = 1.0;
            for (std::size_t k = 0; k < n; ++k) pre[k + 1] = pre[k] * m[k * n + sigma[k]];
            suf[n] = 1.0;
            for (std::size_t k = n; k-- > 0;) suf[k] = suf[k + 1] * m[k * n + sigma[k]];
            const double s = double(signs_[p]);
            sum += s * pre[n];
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t j = sigma[k];
                const Complex others = s * pre[k] * suf[k + 1];
                for (std::size_t a = 0; a < d; ++a) grad[slot[j] * d + a] += g[(k * n + j) * d + a] * others;
            }
        }
        for (auto& c : grad) c *= parity * norm_;
        return parity * norm_ * sum;
    }

    double peak() const override {
        double p = 1.0;
        for (const auto& s : states_) p *= s.peak();
        return p / norm_;
    }

    double length_scale(double t) const override {
        double l = 0.0;
        for (const auto& s : states_) l = std::max(l, s.length_scale(t));
        return l;
    }

    void center(double t, std::span<double> out) const override {
        const std::size_t d = states_.front().dim();
        for (std::size_t k = 0; k < states_.size(); ++k) {
            const auto c = states_[k].center(t);
            std::copy(c.begin(), c.end(), out.begin() + std::ptrdiff_t(k * d));
        }
    }

    bool separable(std::vector<SeparableTerm>& out, Complex scale) const override {
        const std::size_t n = states_.size();
        for (std::size_t p = 0; p < signs_.size(); ++p) {
            const std::uint8_t* sigma = &perms_[p * n];
            // particle j carries orbital k with sigma(k) = j
            std::vector<std::size_t> orbital_of(n);
            for (std::size_t k = 0; k < n; ++k) orbital_of[sigma[k]] = k;
            SeparableTerm term{scale * norm_ * double(signs_[p]), {}};
            for (std::size_t j = 0; j < n; ++j) {
                for (const auto& a : states_[orbital_of[j]].axes()) term.factors.push_back(&a);
            }
            out.push_back(std::move(term));
        }
        return true;
    }

private:
    /// slot[i] = particle in position i of the lexicographic order; returns the
    /// factor relating psi(x) to psi at the sorted configuration.
    double sorted_slots(const ConfigView& x, std::array<std::uint8_t, kMaxParticles>& slot) const {
        const std::size_t n = states_.size();
        for (std::size_t i = 0; i < n; ++i) slot[i] = static_cast<std::uint8_t>(i);
        const auto less = [&](std::uint8_t a, std::uint8_t b) {
            const auto pa = x.position(a), pb = x.position(b);
            return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
        };
        std::stable_sort(slot.begin(), slot.begin() + std::ptrdiff_t(n), less);
        if (sign_ > 0) return 1.0;
        int inversions = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) inversions += slot[i] > slot[j];
        }
        return inversions % 2 ? -1.0 : 1.0;
    }

    std::vector<SingleParticleState> states_;
    int sign_;
    std::vector<std::uint8_t> perms_;
    std::vector<int> signs_;
    double norm_ = 1.0;
};

/**
 * Two particles in a planar isotropic oscillator: ground-state centre of mass
 * times a relative factor r^|l| exp(-mu w r^2 / 2) e^{i l phi}, l = nu + 2k.
 * The relative angle uses the principal branch of atan2.
 */
class AnyonPairNode final : public WaveNode {
public:
    explicit AnyonPairNode(AnyonPairParams p) : p_(p) {
        const double mu_w = p_.reduced_mass() * p_.frequency;
        const double l = std::abs(p_.ell());
        rel_norm_ = std::sqrt(std::pow(mu_w, l + 1.0) / (kPi * std::tgamma(l + 1.0)));
        cm_norm_ = std::sqrt(p_.total_mass() * p_.frequency / kPi);
        energy_ = (l + 2.0) * p_.frequency;
    }

    Complex value(const ConfigView& x, double t) const override {
        std::array<Complex, 4> grad{};
        return value_and_gradient(x, t, grad);
    }

    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const override {
        const double cx = 0.5 * (x(0, 0) + x(1, 0));
        const double cy = 0.5 * (x(0, 1) + x(1, 1));
        const double rx = x(0, 0) - x(1, 0);
        const double ry = x(0, 1) - x(1, 1);
        const double mw = p_.total_mass() * p_.frequency;
        const double muw = p_.reduced_mass() * p_.frequency;
        const double l = p_.ell();
        const double al = std::abs(l);

        const double cm = cm_norm_ * std::exp(-0.5 * mw * (cx * cx + cy * cy));
        const double r2 = rx * rx + ry * ry;
        const double r = std::sqrt(r2);
        const Complex phase_t = std::polar(1.0, -energy_ * t);

        Complex rel;
        std::array<Complex, 2> drel{};
        const double gauss = rel_norm_ * std::exp(-0.5 * muw * r2);
        if (r > 0.0) {
            const double phi = std::atan2(ry, rx);
            rel = gauss * std::pow(r, al) * std::polar(1.0, l * phi);
            const double radial = al / r - muw * r;
            const Complex tangential(0.0, l / r);
            const double ux = rx / r;
            const double uy = ry / r;
            drel[0] = rel * (radial * ux + tangential * (-uy));
            drel[1] = rel * (radial * uy + tangential * ux);
        } else if (l == 0.0) {
            rel = gauss;
        } else if (al == 1.0) {
            const double s = l > 0 ? 1.0 : -1.0;
            rel = 0.0;
            drel[0] = gauss;
            drel[1] = Complex(0.0, s * gauss);
        } else {
            rel = 0.0;
        }

        const Complex dcm_x = -mw * cx * cm;
        const Complex dcm_y = -mw * cy * cm;
        // d/dx1 = 1/2 d/dR + d/dr ; d/dx2 = 1/2 d/dR - d/dr
        grad[0] = phase_t * (0.5 * dcm_x * rel + cm * drel[0]);
        grad[1] = phase_t * (0.5 * dcm_y * rel + cm * drel[1]);
        grad[2] = phase_t * (0.5 * dcm_x * rel - cm * drel[0]);
        grad[3] = phase_t * (0.5 * dcm_y * rel - cm * drel[1]);
        return phase_t * cm * rel;
    }

    double peak() const override {
        const double muw = p_.reduced_mass() * p_.frequency;
        const double al = std::abs(p_.ell());
        const double radial = al > 0.0 ? std::pow(al / muw, 0.5 * al) * std::exp(-0.5 * al) : 1.0;
        return cm_norm_ * rel_norm_ * radial;
    }

    double length_scale(double) const override {
        return 1.0 / std::sqrt(p_.reduced_mass() * p_.frequency);
    }

    void center(double, std::span<double> out) const override { std::fill(out.begin(), out.end(), 0.0); }

    bool anyon_expansion(std::vector<std::pair<Complex, AnyonPairParams>>& out, Complex scale) const override {
        out.emplace_back(scale, p_);
        return true;
    }

private:
    AnyonPairParams p_;
    double rel_norm_ = 1.0;
    double cm_norm_ = 1.0;
    double energy_ = 0.0;
};

class SuperpositionNode final : public WaveNode {
public:
    SuperpositionNode(std::vector<std::pair<Complex, PilotWave>> terms, double norm)
        : terms_(std::move(terms)), inv_norm_(1.0 / norm) {}

    Complex value(const ConfigView& x, double t) const override {
        Complex v = 0.0;
        for (const auto& [c, w] : terms_) v += c * w.value(x, t);
        return v * inv_norm_;
    }

    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const override {
        std::array<Complex, kMaxCoords> g{};
        std::fill(grad.begin(), grad.end(), Complex(0.0));
        Complex v = 0.0;
        for (const auto& [c, w] : terms_) {
            const std::span<Complex> gs(g.data(), grad.size());
            v += c * w.value_and_gradient(x, t, gs);
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += c * gs[i];
        }
        for (auto& e : grad) e *= inv_norm_;
        return v * inv_norm_;
    }

    double peak() const override {
        double p = 0.0;
        for (const auto& [c, w] : terms_) p += std::abs(c) * w.peak();
        return p * inv_norm_;
    }

    double length_scale(double t) const override {
        double l = 0.0;
        for (const auto& [c, w] : terms_) l = std::max(l, w.length_scale(t));
        return l;
    }

    void center(double t, std::span<double> out) const override {
        // centre of the dominant term
        std::size_t best = 0;
        double weight = -1.0;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            const double wgt = std::abs(terms_[i].first) * terms_[i].second.peak();
            if (wgt > weight) {
                weight = wgt;
                best = i;
            }
        }
        terms_[best].second.node().center(t, out);
    }

    bool separable(std::vector<SeparableTerm>& out, Complex scale) const override {
        for (const auto& [c, w] : terms_) {
            if (!w.node().separable(out, scale * c * inv_norm_)) return false;
        }
        return true;
    }

    bool anyon_expansion(std::vector<std::pair<Complex, AnyonPairParams>>& out, Complex scale) const override {
        for (const auto& [c, w] : terms_) {
            if (!w.node().anyon_expansion(out, scale * c * inv_norm_)) return false;
        }
        return true;
    }

private:
    std::vector<std::pair<Complex, PilotWave>> terms_;
    double inv_norm_;
};

class TimeReversedNode final : public WaveNode {
public:
    TimeReversedNode(PilotWave inner, double pivot) : inner_(std::move(inner)), pivot_(pivot) {}

    Complex value(const ConfigView& x, double t) const override {
        return std::conj(inner_.value(x, 2.0 * pivot_ - t));
    }

    Complex value_and_gradient(const ConfigView& x, double t, std::span<Complex> grad) const override {
        const Complex v = inner_.value_and_gradient(x, 2.0 * pivot_ - t, grad);
        for (auto& g : grad) g = std::conj(g);
        return std::conj(v);
    }

    double peak() const override { return inner_.peak(); }
    double length_scale(double t) const override { return inner_.length_scale(2.0 * pivot_ - t); }
    void center(double t, std::span<double> out) const override { inner_.node().center(2.0 * pivot_ - t, out); }

private:
    PilotWave inner_;
    double pivot_;
};

/// Inner product <a|b> of two separable expansions; 1-D overlaps are cached per factor pair.
inline Complex separable_inner(const std::vector<SeparableTerm>& a, const std::vector<SeparableTerm>& b,
                               const QuadratureBox& box) {
    std::map<std::pair<const AxisFactor*, const AxisFactor*>, Complex> cache;
    auto ov = [&](const AxisFactor* f, const AxisFactor* g) {
        const auto key = std::make_pair(f, g);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const Complex v = overlap(*f, *g, box);
        cache.emplace(key, v);
        return v;
    };
    Complex sum = 0.0;
    for (const auto& ta : a) {
        for (const auto& tb : b) {
            Complex prod = std::conj(ta.coef) * tb.coef;
            for (std::size_t i = 0; i < ta.factors.size() && prod != Complex(0.0); ++i) {
                prod *= ov(ta.factors[i], tb.factors[i]);
            }
            sum += prod;
        }
    }
    return sum;
}

}  // namespace detail

// ============================================================================
// Constructors
// ============================================================================

/// psi(x_1..x_N, t) = prod_k phi_k(x_k, t); symmetry tag none.
inline PilotWave make_product(std::vector<SingleParticleState> states) {
    if (states.empty()) throw ParameterError("product: no single-particle states");
    if (states.size() > kMaxParticles) throw CapabilityError("product: too many particles");
    const std::size_t d = states.front().dim();
    for (const auto& s : states) {
        if (s.dim() != d) throw ParameterError("product: single-particle states of mixed dimension");
    }
    const std::size_t n = states.size();
    auto node = std::make_shared<detail::ProductNode>(states);
    return PilotWave(std::move(node), n, d, PilotWave::Structure::product, SymmetryTag::none(), std::move(states));
}

struct SuperposeOptions {
    QuadratureBox box{};
};

/**
 * Pointwise linear combination, renormalised to unit norm.
 *
 * The norm is computed at t = 0 from the separable expansion of the terms
 * (1-D trapezoid overlaps over a box of 12 characteristic lengths, 1024
 * points per axis), or from the angular-momentum decomposition for anyon
 * pairs sharing mass and frequency.
 */
inline PilotWave superpose(const std::vector<std::pair<Complex, PilotWave>>& terms, const SuperposeOptions& opts = {}) {
    if (terms.empty()) throw ParameterError("superpose: empty term list");
    const auto& first = terms.front().second;
    for (const auto& [c, w] : terms) {
        if (w.particles() != first.particles() || w.dim() != first.dim()) {
            throw ParameterError("superpose: terms differ in particle count or dimension");
        }
        if (!(w.symmetry() == first.symmetry())) {
            throw ParameterError("superpose: terms carry different symmetry tags (" + first.symmetry().to_string() +
                                 " vs " + w.symmetry().to_string() + ")");
        }
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw ParameterError("superpose: non-finite coefficient");
    }

    auto raw = std::make_shared<detail::SuperpositionNode>(terms, 1.0);
    double norm2 = 0.0;
    std::vector<detail::SeparableTerm> sep;
    std::vector<std::pair<Complex, AnyonPairParams>> anyons;
    if (terms.size() == 1) {
        norm2 = std::norm(terms.front().first);  // constituents are normalised
    } else if (raw->separable(sep, 1.0)) {
        if (sep.size() > 5000) throw CapabilityError("superpose: separable expansion too large for renormalisation");
        norm2 = detail::separable_inner(sep, sep, opts.box).real();
    } else if (raw->anyon_expansion(anyons, 1.0)) {
        // distinct angular momenta are orthogonal; equal l with equal (m, w) is the same state
        std::map<int, Complex> by_k;
        for (const auto& [c, p] : anyons) {
            if (p.mass != anyons.front().second.mass || p.frequency != anyons.front().second.frequency) {
                throw CapabilityError("superpose: anyon pairs with different mass or frequency");
            }
            by_k[p.k] += c;
        }
        for (const auto& [k, c] : by_k) norm2 += std::norm(c);
    } else {
        throw CapabilityError("superpose: terms admit no closed-form or separable norm");
    }
    if (!(norm2 > 1e-24)) throw ZeroFunctionError("superpose: combination vanishes identically");

    auto node = std::make_shared<detail::SuperpositionNode>(terms, std::sqrt(norm2));
    return PilotWave(std::move(node), first.particles(), first.dim(), PilotWave::Structure::superposition,
                     first.symmetry());
}

/// Two-anyon oscillator state with l = nu + 2k; N = 2, d = 2.
inline PilotWave make_anyon_pair_state(double nu, int k, double frequency, double mass) {
    if (!(nu >= 0.0 && nu < 2.0)) throw ParameterError("anyon pair: nu must lie in [0, 2)");
    if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ParameterError("anyon pair: frequency must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ParameterError("anyon pair: mass must be positive");
    AnyonPairParams p{nu, k, frequency, mass};
    auto node = std::make_shared<detail::AnyonPairNode>(p);
    return PilotWave(std::move(node), 2, 2, PilotWave::Structure::anyon_pair, SymmetryTag::anyonic(nu), {}, p);
}

/// psi'(x, t) = conj(psi(x, 2 t_pivot - t)). Anyonic tags map nu -> 2 - nu.
inline PilotWave time_reversed_wave(const PilotWave& psi, double t_pivot) {
    auto tag = psi.symmetry();
    if (tag.kind == SymmetryKind::anyonic && tag.nu != 0.0) tag.nu = 2.0 - tag.nu;
    auto node = std::make_shared<detail::TimeReversedNode>(psi, t_pivot);
    return PilotWave(std::move(node), psi.particles(), psi.dim(), PilotWave::Structure::time_reversed, tag);
}

// ============================================================================
// Evaluation
// ============================================================================

inline Complex evaluate(const PilotWave& psi, const Configuration& x, double t) {
    psi.check_compatible(x);
    return psi.value(x, t);
}

/// Exact gradient, flat and particle-major (N*d entries).
inline std::vector<Complex> gradient(const PilotWave& psi, const Configuration& x, double t) {
    psi.check_compatible(x);
    std::vector<Complex> g(x.size());
    psi.value_and_gradient(x, t, g);
    return g;
}

inline bool is_node(const PilotWave& psi, const Configuration& x, double t) {
    return std::abs(evaluate(psi, x, t)) < psi.node_threshold();
}

}  // namespace pilotwave
