#include "lapdiag/quadrature.hpp"

#include "lapdiag/errors.hpp"

#include <cmath>

namespace lapdiag {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 times the squared first eigenvector components.
GaussRule golub_welsch(const Vector& diagonal, const Vector& offdiagonal, double mu0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    eig.computeFromTridiagonal(diagonal, offdiagonal, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw NumericalError("quadrature eigen-solve failed");
    GaussRule rule;
    rule.nodes = eig.eigenvalues();
    rule.weights = mu0 * eig.eigenvectors().row(0).transpose().array().square();
    return rule;
}

}  // namespace

GaussRule gauss_hermite_normal(std::size_t n) {
    if (n == 0) throw ArgumentError("quadrature order must be positive");
    const auto m = static_cast<Eigen::Index>(n);
    Vector diag = Vector::Zero(m);
    Vector off(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index i = 0; i + 1 < m; ++i) off(i) = std::sqrt(static_cast<double>(i + 1));
    GaussRule raw = golub_welsch(diag, off, 1.0);
    // Enforce the exact reflection symmetry of the rule.
    GaussRule rule{Vector(m), Vector(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index j = m - 1 - i;
        const double x = 0.5 * (raw.nodes(j) - raw.nodes(i));
        const double w = 0.5 * (raw.weights(i) + raw.weights(j));
        rule.nodes(j) = x;
        rule.nodes(i) = -x;
        rule.weights(i) = w;
        rule.weights(j) = w;
    }
    if (m % 2 == 1) rule.nodes(m / 2) = 0.0;
    rule.weights /= rule.weights.sum();
    return rule;
}

GaussRule gauss_laguerre(std::size_t n, double alpha) {
    if (n == 0) throw ArgumentError("quadrature order must be positive");
    if (!(alpha > -1.0)) throw ArgumentError("Laguerre parameter must exceed -1");
    const auto m = static_cast<Eigen::Index>(n);
    Vector diag(m);
    Vector off(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index i = 0; i < m; ++i) diag(i) = 2.0 * i + 1.0 + alpha;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        off(i) = std::sqrt((i + 1.0) * (i + 1.0 + alpha));
    }
    return golub_welsch(diag, off, std::tgamma(alpha + 1.0));
}

}  // namespace lapdiag
