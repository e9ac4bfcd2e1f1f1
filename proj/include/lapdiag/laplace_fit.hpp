#pragma once

#include "lapdiag/models.hpp"

#include <string>

namespace lapdiag {

struct NewtonOptions {
    double tol = 1e-9;
    int max_iterations = 100;
    double armijo = 1e-4;
    /// Iterates with |x| > divergence_factor (1 + |x0|) raise ModeDivergedError.
    double divergence_factor = 1e3;
    int max_fallbacks = 10;
};

struct ModeResult {
    Vector mode;
    int iterations = 0;
    double grad_norm = 0.0;          // |grad v(mode)|
    double initial_grad_norm = 0.0;  // |grad v(x0)|
    bool converged = false;
};

/// Damped Newton on v with Armijo backtracking. An accepted full step that is
/// still large is extended by doubling while v keeps decreasing, so a
/// potential without a finite minimizer is driven past the divergence
/// radius instead of creeping along. Stops once
///   |grad v| <= tol * min(max(1, g0), 1/n + g0),  g0 = |grad v(x0)|,
/// which also gives |grad V| <= tol (1 + |grad V(x0)|) for V = n v.
/// Non-PD Hessians get Levenberg damping; more than max_fallbacks in a row
/// raise NumericalError.
ModeResult find_mode(const Model& model, const Vector& x0, const NewtonOptions& options = {});

/// Laplace approximation N(mode, H_V^{-1}) with H_V = n grad^2 v(mode) = L L^T
struct LaplaceFit {
    std::size_t d = 0;
    double n = 0.0;
    Vector mode;
    Matrix hessian_V;
    Matrix chol;           // L, lower triangular
    Matrix whitening;      // L^{-T}: x = mode + L^{-T} z
    double lambda_min_Hv = 0.0;  // smallest eigenvalue of grad^2 v(mode)
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double value_at_mode = 0.0;  // v(mode)
};

/// find_mode, Hessian and Cholesky factor. A Hessian at the mode that is not
/// PD raises DegenerateFitError. An empty x0 starts at 0.
LaplaceFit fit(const Model& model, const Vector& x0 = Vector(), const NewtonOptions& options = {});

/// x(z) = mode + L^{-T} z.
Vector unwhiten(const LaplaceFit& f, const Vector& z);

/// W(z) = n v(mode + L^{-T} z).
double whitened_potential(const LaplaceFit& f, const Model& model, const Vector& z);
/// W(z) - W(0), evaluated as n (v(x(z)) - v(mode)).
double whitened_excess(const LaplaceFit& f, const Model& model, const Vector& z);
/// grad W(z) = L^{-1} grad V(x(z)).
Vector whitened_gradient(const LaplaceFit& f, const Model& model, const Vector& z);
/// <grad^3 W(0), z^3> = n <grad^3 v(mode), (L^{-T} z)^3>.
double whitened_third(const LaplaceFit& f, const Model& model, const Vector& z);

/// r3(z) = W(z) - W(0) - |z|^2 / 2.
double r3(const LaplaceFit& f, const Model& model, const Vector& z);
/// r4(z) = r3(z) - <grad^3 W(0), z^3> / 6.
double r4(const LaplaceFit& f, const Model& model, const Vector& z);

/// {d, n, mode, hessian_chol, lambda_min, grad_norm, iterations}.
std::string fit_to_json(const LaplaceFit& f);

}  // namespace lapdiag
