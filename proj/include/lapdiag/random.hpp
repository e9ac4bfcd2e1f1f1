#pragma once

#include "lapdiag/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace lapdiag {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of sub-stream `index` under `seed`. Streams for different indices
/// are statistically independent and do not depend on scheduling.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(stream_seed(seed, index));
}

/// Fills `out` with independent standard normals.
template <class Derived>
void fill_standard_normal(Rng& rng, Eigen::DenseBase<Derived>& out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            out(i, j) = normal(rng);
        }
    }
}

inline Vector standard_normal_vector(Rng& rng, Eigen::Index d) {
    Vector z(d);
    fill_standard_normal(rng, z);
    return z;
}

/// Uniform point on the unit sphere in R^d.
inline Vector random_unit_vector(Rng& rng, Eigen::Index d) {
    Vector u = standard_normal_vector(rng, d);
    double norm = u.norm();
    while (norm == 0.0) {
        u = standard_normal_vector(rng, d);
        norm = u.norm();
    }
    return u / norm;
}

/// Uniform point in the unit ball in R^d.
inline Vector random_in_unit_ball(Rng& rng, Eigen::Index d) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vector u = random_unit_vector(rng, d);
    return u * std::pow(uniform(rng), 1.0 / static_cast<double>(d));
}

}  // namespace lapdiag
