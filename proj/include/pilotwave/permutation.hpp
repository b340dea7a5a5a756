// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file permutation.hpp
 * @brief Bijections on particle labels and their action on configurations.
 *
 * Labels are zero-based internally; the one-based factory mirrors the usual
 * image-sequence notation, e.g. {2, 3, 4, 1} for the cycle (1234).
 */

#pragma once

#include <pilotwave/core.hpp>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace pilotwave {

class Permutation {
public:
    Permutation() = default;

    static Permutation identity(std::size_t n) {
        std::vector<std::size_t> img(n);
        std::iota(img.begin(), img.end(), std::size_t{0});
        return Permutation(std::move(img));
    }

    /// Image sequence over {1..N}; throws ParameterError unless it is a rearrangement of 1..N.
    static Permutation from_images(const std::vector<std::size_t>& one_based) {
        std::vector<std::size_t> img;
        img.reserve(one_based.size());
        for (std::size_t v : one_based) {
            if (v == 0) throw ParameterError("permutation: images are one-based");
            img.push_back(v - 1);
        }
        return from_zero_based(std::move(img));
    }

    static Permutation from_zero_based(std::vector<std::size_t> img) {
        std::vector<bool> seen(img.size(), false);
        for (std::size_t v : img) {
            if (v >= img.size() || seen[v]) {
                throw ParameterError("permutation: image sequence is not a rearrangement of 1..N");
            }
            seen[v] = true;
        }
        return Permutation(std::move(img));
    }

    /// Swaps labels i and j (zero-based).
    static Permutation transposition(std::size_t n, std::size_t i, std::size_t j) {
        auto p = identity(n);
        if (i >= n || j >= n) throw ParameterError("permutation: transposition index out of range");
        std::swap(p.images_[i], p.images_[j]);
        return p;
    }

    std::size_t size() const noexcept { return images_.size(); }
    std::size_t operator()(std::size_t i) const { return images_[i]; }
    const std::vector<std::size_t>& images() const noexcept { return images_; }

    std::vector<std::size_t> images_one_based() const {
        std::vector<std::size_t> out(images_);
        for (auto& v : out) ++v;
        return out;
    }

    Permutation inverse() const {
        std::vector<std::size_t> inv(images_.size());
        for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = i;
        return Permutation(std::move(inv));
    }

    /// Composition: (P * Q)(j) = P(Q(j)), i.e. Q acts first.
    Permutation operator*(const Permutation& q) const {
        if (q.size() != size()) throw ParameterError("permutation: composing different sizes");
        std::vector<std::size_t> img(size());
        for (std::size_t j = 0; j < size(); ++j) img[j] = images_[q.images_[j]];
        return Permutation(std::move(img));
    }

    /// +1 for even, -1 for odd; computed from the cycle decomposition.
    int parity() const {
        std::vector<bool> visited(images_.size(), false);
        std::size_t transpositions = 0;
        for (std::size_t start = 0; start < images_.size(); ++start) {
            if (visited[start]) continue;
            std::size_t len = 0;
            for (std::size_t i = start; !visited[i]; i = images_[i]) {
                visited[i] = true;
                ++len;
            }
            transpositions += len - 1;
        }
        return transpositions % 2 == 0 ? 1 : -1;
    }

    bool is_identity() const {
        for (std::size_t i = 0; i < images_.size(); ++i) {
            if (images_[i] != i) return false;
        }
        return true;
    }

    bool operator==(const Permutation&) const = default;

private:
    explicit Permutation(std::vector<std::size_t> img) : images_(std::move(img)) {}

    std::vector<std::size_t> images_;
};

inline int parity(const Permutation& p) { return p.parity(); }

/// All N! permutations in lexicographic order of their image sequences.
inline std::vector<Permutation> all_permutations(std::size_t n) {
    std::vector<std::size_t> img(n);
    std::iota(img.begin(), img.end(), std::size_t{0});
    std::vector<Permutation> out;
    do {
        out.push_back(Permutation::from_zero_based(img));
    } while (std::next_permutation(img.begin(), img.end()));
    return out;
}

/// Relabels particles: position P(j) of the result is position j of the input,
/// equivalently result_i = x_{P^-1(i)}.
inline Configuration apply(const Permutation& p, const Configuration& x) {
    if (p.size() != x.particles()) {
        throw ParameterError("apply: permutation of size " + std::to_string(p.size()) +
                             " on " + std::to_string(x.particles()) + " particles");
    }
    Configuration out(x.particles(), x.dim());
    for (std::size_t j = 0; j < x.particles(); ++j) {
        const auto src = x.position(j);
        std::copy(src.begin(), src.end(), out.position(p(j)).begin());
    }
    return out;
}

/// Same relabelling on a flat per-particle array (velocities, gradients).
template <class T>
std::vector<T> apply_flat(const Permutation& p, std::span<const T> values, std::size_t dim) {
    std::vector<T> out(values.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        for (std::size_t a = 0; a < dim; ++a) out[p(j) * dim + a] = values[j * dim + a];
    }
    return out;
}

}  // namespace pilotwave
