#include "lapdiag/laplace_fit.hpp"

#include "lapdiag/errors.hpp"
#include "lapdiag/json.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lapdiag {

namespace {

// Newton direction from H p = -g, adding Levenberg damping when H is not PD.
// Returns false if damping was needed.
bool newton_direction(const Matrix& h, const Vector& g, Vector& p) {
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() == Eigen::Success) {
        p = -llt.solve(g);
        if (all_finite(p)) return true;
    }
    const auto d = h.rows();
    double mu = std::max(1e-8, 1e-8 * h.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 80; ++attempt) {
        Eigen::LLT<Matrix> damped(h + mu * Matrix::Identity(d, d));
        if (damped.info() == Eigen::Success) {
            p = -damped.solve(g);
            if (all_finite(p)) return false;
        }
        mu *= 10.0;
    }
    p = -g;
    return false;
}

}  // namespace

ModeResult find_mode(const Model& model, const Vector& x0, const NewtonOptions& options) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    if (x0.size() != d) throw ArgumentError("find_mode: x0 has the wrong dimension");
    if (!all_finite(x0)) throw ArgumentError("find_mode: x0 must be finite");
    if (options.max_iterations < 1) throw ArgumentError("find_mode: max_iterations must be >= 1");

    const double radius = options.divergence_factor * (1.0 + x0.norm());
    Vector x = x0;
    double f = model.value(x);
    Vector g = model.gradient(x);
    if (!std::isfinite(f) || !all_finite(g)) {
        throw DomainError("find_mode: potential is not finite at the start point");
    }
    ModeResult out;
    out.initial_grad_norm = g.norm();
    const double g0 = out.initial_grad_norm;
    const double threshold =
        options.tol * std::min(std::max(1.0, g0), 1.0 / model.n() + g0);
    int fallbacks = 0;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (g.norm() <= threshold) {
            out.converged = true;
            break;
        }
        Vector p;
        if (newton_direction(model.hessian(x), g, p)) {
            fallbacks = 0;
        } else if (++fallbacks > options.max_fallbacks) {
            throw NumericalError("find_mode: Hessian not positive definite for " +
                                 std::to_string(options.max_fallbacks) + " consecutive steps");
        }
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            p = -g;
            slope = -g.squaredNorm();
        }
        double t = 1.0;
        double ft = model.value(x + p);
        int halvings = 0;
        while (!(std::isfinite(ft) && ft <= f + options.armijo * t * slope)) {
            if (++halvings > 60) break;
            t *= 0.5;
            ft = model.value(x + t * p);
        }
        if (halvings > 60) {
            // No decrease representable in floating point: as converged as it gets.
            break;
        }
        if (halvings == 0 && p.norm() > 1e-3 * (1.0 + x.norm())) {
            for (int doubling = 0; doubling < 40; ++doubling) {
                const double f2 = model.value(x + 2.0 * t * p);
                if (!(std::isfinite(f2) && f2 <= ft)) break;
                t *= 2.0;
                ft = f2;
                if ((x + t * p).norm() > radius) break;
            }
        }
        x += t * p;
        f = ft;
        if (x.norm() > radius) {
            throw ModeDivergedError("iterate norm " + json::number(x.norm()) +
                                    " exceeds " + json::number(radius) +
                                    "; the minimizer is likely at infinity (e.g. separable data)");
        }
        g = model.gradient(x);
        if (!all_finite(g)) throw NumericalError("find_mode: non-finite gradient");
    }
    if (!out.converged && g.norm() <= threshold) out.converged = true;
    out.mode = x;
    out.iterations = it;
    out.grad_norm = g.norm();
    return out;
}

LaplaceFit fit(const Model& model, const Vector& x0, const NewtonOptions& options) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    const Vector start = x0.size() == 0 ? Vector(Vector::Zero(d)) : x0;
    const ModeResult mode = find_mode(model, start, options);
    LaplaceFit f;
    f.d = model.dim();
    f.n = model.n();
    f.mode = mode.mode;
    f.iterations = mode.iterations;
    f.grad_norm = mode.grad_norm;
    f.converged = mode.converged;
    f.value_at_mode = model.value(f.mode);
    const Matrix hv = model.hessian(f.mode);
    f.hessian_V = f.n * hv;
    try {
        f.chol = cholesky_lower(f.hessian_V, "Hessian at the mode");
    } catch (const DomainError& e) {
        throw DegenerateFitError(e.what());
    }
    f.whitening = inverse_transpose_factor(f.chol);
    f.lambda_min_Hv = min_eigenvalue(hv);
    if (!(f.lambda_min_Hv > 0.0)) {
        throw DegenerateFitError("smallest Hessian eigenvalue " + json::number(f.lambda_min_Hv));
    }
    return f;
}

Vector unwhiten(const LaplaceFit& f, const Vector& z) {
    if (z.size() != static_cast<Eigen::Index>(f.d)) {
        throw ArgumentError("whitened point has the wrong dimension");
    }
    return f.mode + f.whitening * z;
}

double whitened_potential(const LaplaceFit& f, const Model& model, const Vector& z) {
    return f.n * model.value(unwhiten(f, z));
}

double whitened_excess(const LaplaceFit& f, const Model& model, const Vector& z) {
    return f.n * (model.value(unwhiten(f, z)) - f.value_at_mode);
}

Vector whitened_gradient(const LaplaceFit& f, const Model& model, const Vector& z) {
    return f.n * (f.whitening.transpose() * model.gradient(unwhiten(f, z)));
}

double whitened_third(const LaplaceFit& f, const Model& model, const Vector& z) {
    if (z.size() != static_cast<Eigen::Index>(f.d)) {
        throw ArgumentError("whitened point has the wrong dimension");
    }
    return f.n * model.third_contract(f.mode, f.whitening * z);
}

double r3(const LaplaceFit& f, const Model& model, const Vector& z) {
    return whitened_excess(f, model, z) - 0.5 * z.squaredNorm();
}

double r4(const LaplaceFit& f, const Model& model, const Vector& z) {
    return r3(f, model, z) - whitened_third(f, model, z) / 6.0;
}

std::string fit_to_json(const LaplaceFit& f) {
    json::Object o;
    o.integer("d", static_cast<long long>(f.d))
        .num("n", f.n)
        .raw("mode", json::array(f.mode))
        .raw("hessian_chol", json::matrix(f.chol))
        .num("lambda_min", f.lambda_min_Hv)
        .num("grad_norm", f.grad_norm)
        .integer("iterations", f.iterations);
    return o.dump();
}

}  // namespace lapdiag
