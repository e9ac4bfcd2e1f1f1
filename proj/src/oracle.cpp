#include "lapdiag/oracle.hpp"

#include "lapdiag/errors.hpp"
#include "lapdiag/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lapdiag {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Integral {
    double value = 0.0;
    std::size_t nodes = 0;
};

// Adaptive Gauss-Kronrod over [-L, L] with N points per panel. A panel is
// accepted when its error estimate is below tol * width / (2L) + rel * |f|_1 on
// the panel. The relative part keeps bisection from chasing rounding noise in
// potentials of the form n (v(x) - v(mode)) at large n.
template <unsigned N, class F>
Integral adaptive(F&& f, double tol, double rel, unsigned depth) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, N>;
    Integral out;
    auto counted = [&](double x) {
        ++out.nodes;
        return f(x);
    };
    auto recurse = [&](auto&& self, double a, double b, unsigned level) -> double {
        double err = 0.0, l1 = 0.0;
        const double value = Rule::integrate(counted, a, b, 0, 0.0, &err, &l1);
        // Boost reports the single-panel error on the reference interval [-1, 1].
        err *= 0.5 * (b - a);
        if (err <= tol * (b - a) / (2.0 * kTvBox) + rel * l1 || level == 0) return value;
        const double mid = 0.5 * (a + b);
        return self(self, a, mid, level - 1) + self(self, mid, b, level - 1);
    };
    out.value = recurse(recurse, -kTvBox, kTvBox, depth);
    return out;
}

// Integral over the box in 1 or 2 dimensions. The outer 2-D tolerance is looser
// than the inner one so the outer rule does not chase inner rounding noise.
constexpr double kInnerTol = 1e-12;
constexpr double kInnerRel = 1e-11;
constexpr double kOuterTol = 1e-10;
constexpr double kOuterRel = 1e-10;

template <unsigned N, class F>
Integral box_integral(std::size_t d, F&& f) {
    if (d == 1) {
        Vector z(1);
        return adaptive<N>([&](double x) {
            z(0) = x;
            return f(z);
        }, kInnerTol, kInnerRel, 24);
    }
    std::size_t nodes = 0;
    Integral outer = adaptive<N>([&](double x) {
        Vector z(2);
        z(0) = x;
        const Integral inner = adaptive<N>([&](double y) {
            z(1) = y;
            return f(z);
        }, kInnerTol, kInnerRel, 24);
        nodes += inner.nodes;
        return inner.value;
    }, kOuterTol, kOuterRel, 12);
    outer.nodes = nodes;
    return outer;
}

template <unsigned N>
TvResult tv_with_rule(const std::function<double(const Vector&)>& excess, std::size_t d) {
    auto rho = [&](const Vector& z) {
        const double e = excess(z);
        if (std::isnan(e) || e == -std::numeric_limits<double>::infinity()) {
            throw DomainError("non-finite potential inside the quadrature box");
        }
        return std::exp(-e);
    };
    const Integral norm = box_integral<N>(d, rho);
    if (!(norm.value > 0.0) || !std::isfinite(norm.value)) {
        throw DomainError("posterior normalizing constant is not finite and positive");
    }
    const double gauss = std::pow(2.0 * kPi, -0.5 * static_cast<double>(d));
    const Integral diff = box_integral<N>(d, [&](const Vector& z) {
        return std::abs(rho(z) / norm.value - gauss * std::exp(-0.5 * z.squaredNorm()));
    });
    TvResult r;
    r.tv = std::clamp(0.5 * diff.value, 0.0, 1.0);
    r.normalizing_constant = norm.value;
    r.quadrature_nodes = norm.nodes + diff.nodes;
    return r;
}

void require_small_dim(std::size_t d) {
    if (d == 0) throw ArgumentError("dimension must be >= 1");
    if (d > 2) throw UnsupportedDimensionError("brute-force quadrature supports d <= 2 only");
}

}  // namespace

TvResult tv_whitened(const std::function<double(const Vector&)>& excess, std::size_t d) {
    require_small_dim(d);
    TvResult fine = tv_with_rule<31>(excess, d);
    const TvResult coarse = tv_with_rule<15>(excess, d);
    fine.estimated_error = std::abs(fine.tv - coarse.tv);
    return fine;
}

TvResult tv_bruteforce(const Model& model, const LaplaceFit& fit) {
    require_small_dim(fit.d);
    if (model.dim() != fit.d) throw ArgumentError("fit and model dimensions differ");
    return tv_whitened([&](const Vector& z) { return whitened_excess(fit, model, z); }, fit.d);
}

double leading_term_quadrature(const Model& model, const LaplaceFit& fit) {
    require_small_dim(fit.d);
    const double gauss = std::pow(2.0 * kPi, -0.5 * static_cast<double>(fit.d));
    const Integral r = box_integral<31>(fit.d, [&](const Vector& z) {
        return std::abs(whitened_third(fit, model, z)) * gauss * std::exp(-0.5 * z.squaredNorm());
    });
    return r.value / 12.0;
}

double lemma31_lower_bound(const GaussianMoments& m, std::size_t d, double n) {
    if (d < 2) throw ArgumentError("the population lower bound needs d >= 2");
    if (!(n >= 1.0)) throw ArgumentError("n must be >= 1");
    const double a10 = m.at(1, 0), a12 = m.at(1, 2), a21 = m.at(2, 1), a23 = m.at(2, 3);
    const double bracket = static_cast<double>(d - 1) * std::abs(a21) / a10 - 2.0 * std::abs(a23) / a12;
    return 2.0 / (std::sqrt(a12) * std::sqrt(n)) * bracket / 12.0;
}

double population_L_exact(const GaussianMoments& m, std::size_t d, double n,
                          std::size_t quadrature_order) {
    if (d < 2) throw ArgumentError("population_L_exact needs d >= 2");
    if (!(n > 0.0)) throw ArgumentError("n must be positive");
    if (quadrature_order < 2) throw ArgumentError("quadrature order must be >= 2");
    const double a10 = m.at(1, 0), a12 = m.at(1, 2), a21 = m.at(2, 1), a23 = m.at(2, 3);
    // With b = n^{-1/2}(a12^{-1/2} Z_1, a10^{-1/2} Z_{2:d}) the whitened cubic is
    // n^{-1/2} Z_1 (A Z_1^2 + B Q), Q = |Z_{2:d}|^2.
    const double A = a23 / std::pow(a12, 1.5);
    const double B = 3.0 * a21 / (std::sqrt(a12) * a10);
    const double k = 0.5 * static_cast<double>(d - 1);
    // E|Z_1| g(Z_1^2) = sqrt(2/pi) int g(2s) e^{-s} ds, and Q = 2t with t ~ Gamma(k).
    // The inner expectation E_t |c + B t| is closed form through regularized
    // incomplete gammas, using E|u| = 2 E[u+] - E u and E[t 1{t < x}] = k P(k + 1, x).
    auto inner = [&](double c) {
        const double mean = c + B * k;
        if (B == 0.0 || c * B >= 0.0) return std::abs(mean);
        const double root = -c / B;
        const double positive =
            B > 0.0 ? c * boost::math::gamma_q(k, root) + B * k * boost::math::gamma_q(k + 1.0, root)
                    : c * boost::math::gamma_p(k, root) + B * k * boost::math::gamma_p(k + 1.0, root);
        return 2.0 * positive - mean;
    };
    auto evaluate = [&](std::size_t order) {
        const GaussRule s = gauss_laguerre(order, 0.0);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < s.nodes.size(); ++i) sum += s.weights(i) * 2.0 * inner(A * s.nodes(i));
        return std::sqrt(2.0 / kPi) * sum / (12.0 * std::sqrt(n));
    };
    double previous = evaluate(quadrature_order);
    for (std::size_t order = 2 * quadrature_order; order <= 2048; order *= 2) {
        const double next = evaluate(order);
        if (std::abs(next - previous) <= 1e-8 * std::abs(next)) return next;
        previous = next;
    }
    throw NumericalError("population_L_exact did not stabilize under order doubling");
}

TailCheck gamma_tail_check(double lambda, double c) {
    if (!(c > 0.0) || !(lambda > c)) throw ArgumentError("gamma tail check needs lambda > c > 0");
    TailCheck r;
    r.exact = boost::math::tgamma(c, lambda);
    r.bound = std::exp(c - lambda) * std::pow(lambda, c);
    return r;
}

TailCheck polar_tail_check(double a, double b, double p, std::size_t d) {
    const double dd = static_cast<double>(d);
    if (d == 0 || !(a > 0.0) || !(b > 0.0) || !(p >= 0.0)) {
        throw ArgumentError("polar tail check needs a, b > 0, p >= 0 and d >= 1");
    }
    if (!(a * b * dd > p + dd)) throw ArgumentError("polar tail check needs a b d > p + d");
    const double r0 = a * std::sqrt(dd);
    const double rate = b * std::sqrt(dd);
    // Surface area of the unit sphere times (2 pi)^{-d/2}: 2^{1 - d/2} / Gamma(d/2).
    const double log_area = (1.0 - 0.5 * dd) * std::log(2.0) - std::lgamma(0.5 * dd);
    // Shift r = r0 + s and factor out the value at r0 to keep the integrand O(1).
    auto f = [&](double s) {
        const double r = r0 + s;
        return std::exp((p + dd - 1.0) * std::log(r / r0) - rate * s);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    const double scaled = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
    TailCheck out;
    out.exact = std::exp(log_area + (p + dd - 1.0) * std::log(r0) - rate * r0) * scaled;
    out.bound = std::pow(std::exp(1.0) * a, p) *
                std::exp((0.5 * p + 1.0) * std::log(dd) + (1.5 + std::log(a) - a * b) * dd);
    return out;
}

}  // namespace lapdiag
