#pragma once

#include "lapdiag/linalg.hpp"

#include <cstddef>

namespace lapdiag {

struct GaussRule {
    Vector nodes;
    Vector weights;
};

/// n-point Gauss-Hermite rule for E f(Z), Z ~ N(0, 1). Nodes come in exact
/// pairs (x, -x) with equal weights: node i and node n-1-i are negatives of
/// each other, and the middle node of an odd rule is exactly 0.
GaussRule gauss_hermite_normal(std::size_t n);

/// n-point generalized Gauss-Laguerre rule for int_0^inf x^alpha e^{-x} f(x) dx.
GaussRule gauss_laguerre(std::size_t n, double alpha);

/// Sum_i w_i (f(x_i) + f(-x_i)) over the pairs of a Gauss-Hermite rule, so
/// odd integrands cancel exactly.
template <class F>
double symmetric_expectation(const GaussRule& rule, F&& f) {
    const auto n = rule.nodes.size();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n / 2; ++i) {
        const double x = rule.nodes(n - 1 - i);
        sum += rule.weights(i) * (f(x) + f(-x));
    }
    if (n % 2 == 1) sum += rule.weights(n / 2) * f(0.0);
    return sum;
}

}  // namespace lapdiag
