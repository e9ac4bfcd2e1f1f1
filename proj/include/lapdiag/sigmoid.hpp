#pragma once

#include <cmath>

namespace lapdiag {

/// Logistic function, evaluated without overflow for any finite t.
inline double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// log(1 + e^t).
inline double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

/// log sigma(t) = -softplus(-t).
inline double log_sigmoid(double t) { return -softplus(-t); }

/// sigma'(t) = sigma(t) sigma(-t); both factors are computed directly so
/// nothing cancels in the tails.
inline double sigmoid_d1(double t) { return sigmoid(t) * sigmoid(-t); }

/// sigma''(t) = sigma'(t) (sigma(-t) - sigma(t)). Exactly odd in t.
inline double sigmoid_d2(double t) {
    const double p = sigmoid(t);
    const double q = sigmoid(-t);
    return p * q * (q - p);
}

/// sigma'''(t) = sigma'(t) (1 - 6 sigma'(t)).
inline double sigmoid_d3(double t) {
    const double s1 = sigmoid_d1(t);
    return s1 * (1.0 - 6.0 * s1);
}

/// sigma^{(k)} for k = 0..3.
inline double sigmoid_derivative(int k, double t) {
    switch (k) {
        case 0: return sigmoid(t);
        case 1: return sigmoid_d1(t);
        case 2: return sigmoid_d2(t);
        default: return sigmoid_d3(t);
    }
}

}  // namespace lapdiag
