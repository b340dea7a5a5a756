// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file core.hpp
 * @brief Shared value types: configurations, complex scalars and the error hierarchy.
 *
 * Natural units are used throughout (hbar = 1). A Configuration stores the
 * N particle positions of a d-dimensional system as one flat coordinate
 * array, particle-major: coordinate (k, a) lives at index k*d + a.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pilotwave {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Upper bound on N*d; keeps per-evaluation scratch space on the stack.
inline constexpr std::size_t kMaxCoords = 48;
inline constexpr std::size_t kMaxParticles = 16;

// ============================================================================
// Errors
// ============================================================================

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument values or incompatible shapes.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The wave function vanishes (below the node threshold) where a phase is needed.
class NodeError : public Error {
public:
    using Error::Error;
};

/// Point lies on an excluded singular set (e.g. a flux line).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Request exceeds a hard size cap (N! enumeration, lifting).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// A stated precondition on the inputs does not hold (e.g. non-orthonormal orbitals).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The requested construction is identically zero.
class ZeroFunctionError : public Error {
public:
    using Error::Error;
};

/// Scenario or registry misconfiguration.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// ============================================================================
// Configuration
// ============================================================================

/// Non-owning view of a configuration point.
struct ConfigView {
    std::span<const double> coords;
    std::size_t particles = 0;
    std::size_t dim = 0;

    std::span<const double> position(std::size_t k) const { return coords.subspan(k * dim, dim); }
    double operator()(std::size_t k, std::size_t axis) const { return coords[k * dim + axis]; }
};

/**
 * Ordered list of N particle positions in R^d.
 *
 * N and d are fixed at construction. Every coordinate must be finite.
 */
class Configuration {
public:
    Configuration() = default;

    Configuration(std::size_t particles, std::size_t dim)
        : particles_(particles), dim_(dim), coords_(particles * dim, 0.0) {
        check_shape();
    }

    Configuration(std::size_t particles, std::size_t dim, std::vector<double> coords)
        : particles_(particles), dim_(dim), coords_(std::move(coords)) {
        check_shape();
        if (coords_.size() != particles_ * dim_) {
            throw ParameterError("configuration: expected " + std::to_string(particles_ * dim_) +
                                 " coordinates, got " + std::to_string(coords_.size()));
        }
        check_finite();
    }

    /// Builds from one position vector per particle; all must share a dimension.
    static Configuration from_positions(const std::vector<std::vector<double>>& positions) {
        if (positions.empty()) throw ParameterError("configuration: no particles");
        const std::size_t d = positions.front().size();
        std::vector<double> flat;
        flat.reserve(positions.size() * d);
        for (const auto& p : positions) {
            if (p.size() != d) throw ParameterError("configuration: mixed particle dimensions");
            flat.insert(flat.end(), p.begin(), p.end());
        }
        return Configuration(positions.size(), d, std::move(flat));
    }

    std::size_t particles() const noexcept { return particles_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return coords_.size(); }

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<double> coords() noexcept { return coords_; }

    std::span<const double> position(std::size_t k) const {
        return std::span<const double>(coords_).subspan(k * dim_, dim_);
    }
    std::span<double> position(std::size_t k) { return std::span<double>(coords_).subspan(k * dim_, dim_); }

    double operator()(std::size_t k, std::size_t axis) const { return coords_[k * dim_ + axis]; }
    double& operator()(std::size_t k, std::size_t axis) { return coords_[k * dim_ + axis]; }

    ConfigView view() const noexcept { return ConfigView{coords_, particles_, dim_}; }
    operator ConfigView() const noexcept { return view(); }

    bool operator==(const Configuration&) const = default;

private:
    void check_shape() const {
        if (particles_ < 1 || particles_ > kMaxParticles) {
            throw ParameterError("configuration: particle count must be in [1, " +
                                 std::to_string(kMaxParticles) + "]");
        }
        if (dim_ < 1 || dim_ > 3) throw ParameterError("configuration: dimension must be 1, 2 or 3");
        if (particles_ * dim_ > kMaxCoords) throw ParameterError("configuration: too many coordinates");
    }

    void check_finite() const {
        for (double c : coords_) {
            if (!std::isfinite(c)) throw ParameterError("configuration: non-finite coordinate");
        }
    }

    std::size_t particles_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

/// Euclidean distance between particles i and j.
inline double pair_distance(const ConfigView& x, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t a = 0; a < x.dim; ++a) {
        const double diff = x(i, a) - x(j, a);
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline double max_abs_difference(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace pilotwave
