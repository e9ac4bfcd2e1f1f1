#pragma once

#include "lapdiag/laplace_fit.hpp"
#include "lapdiag/models.hpp"

#include <cstddef>
#include <functional>

namespace lapdiag {

struct TvResult {
    double tv = 0.0;
    /// int exp(-(W(z) - W(0))) dz over the box.
    double normalizing_constant = 0.0;
    std::size_t quadrature_nodes = 0;
    double estimated_error = 0.0;
};

/// Half-width of the whitened quadrature box [-12, 12]^d.
inline constexpr double kTvBox = 12.0;

/// TV(rho, N(0, I_d)) for rho proportional to exp(-excess(z)), d <= 2, by
/// nested adaptive Gauss-Kronrod quadrature over the box. The error estimate
/// compares the 31-point rule against the 15-point rule.
TvResult tv_whitened(const std::function<double(const Vector&)>& excess, std::size_t d);

/// TV between the posterior and its Laplace approximation, computed in
/// whitened coordinates with excess W(z) - W(0).
TvResult tv_bruteforce(const Model& model, const LaplaceFit& fit);

/// (1/12) E |<grad^3 W(0), Z^3>| by adaptive quadrature, d <= 2.
double leading_term_quadrature(const Model& model, const LaplaceFit& fit);

/// (1/12) (2 / (a12^{1/2} sqrt(n))) ((d - 1)|a21| / a10 - 2|a23| / a12).
/// Negative values are returned unchanged.
double lemma31_lower_bound(const GaussianMoments& moments, std::size_t d, double n);

/// L of the population model at b = beta, from the moment closed form of the
/// whitened third derivative: Z_1 normal (Gauss-Laguerre in Z_1^2 / 2) and
/// |Z_{2:d}|^2 chi-square (closed form through incomplete gamma). The order starts at
/// `quadrature_order` and doubles until the relative change is below 1e-8.
double population_L_exact(const GaussianMoments& moments, std::size_t d, double n,
                          std::size_t quadrature_order = 256);

struct TailCheck {
    double exact = 0.0;
    double bound = 0.0;
};

/// exact = Gamma(c, lambda) (upper incomplete gamma), bound = e^{c - lambda} lambda^c.
TailCheck gamma_tail_check(double lambda, double c);

/// numeric = (2 pi)^{-d/2} int_{|x| >= a sqrt(d)} |x|^p exp(-b sqrt(d) |x|) dx by radial
/// quadrature, bound = (e a)^p exp((p/2 + 1) log d + (3/2 + log a - a b) d).
TailCheck polar_tail_check(double a, double b, double p, std::size_t d);

}  // namespace lapdiag
