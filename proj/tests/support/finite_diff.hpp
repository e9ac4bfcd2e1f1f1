#pragma once

#include "lapdiag/models.hpp"

#include <cmath>

namespace lapdiag::testing {

inline Vector fd_gradient(const Model& m, const Vector& x) {
    const double h = 1e-5 * (1.0 + x.norm());
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector e = Vector::Zero(x.size());
        e(i) = h;
        g(i) = (m.value(x + e) - m.value(x - e)) / (2.0 * h);
    }
    return g;
}

inline Matrix fd_hessian(const Model& m, const Vector& x) {
    const double h = 1e-5 * (1.0 + x.norm());
    Matrix out(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector e = Vector::Zero(x.size());
        e(i) = h;
        out.col(i) = (m.gradient(x + e) - m.gradient(x - e)) / (2.0 * h);
    }
    return out;
}

/// d^3/dt^3 v(x + t u) at t = 0 from second derivatives along the line.
inline double fd_third_directional(const Model& m, const Vector& x, const Vector& u) {
    const double h = 1e-4 * (1.0 + x.norm());
    auto second = [&](double t) { return u.dot(m.hessian(x + t * u) * u); };
    return (second(h) - second(-h)) / (2.0 * h);
}

inline double fd_fourth_directional(const Model& m, const Vector& x, const Vector& u) {
    const double h = 1e-4 * (1.0 + x.norm());
    auto third = [&](double t) { return m.third_contract(x + t * u, u); };
    return (third(h) - third(-h)) / (2.0 * h);
}

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b)));
}

}  // namespace lapdiag::testing
