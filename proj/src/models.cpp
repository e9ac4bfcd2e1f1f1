#include "lapdiag/models.hpp"

#include "lapdiag/errors.hpp"
#include "lapdiag/sigmoid.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lapdiag {

namespace {

void require_point(const Vector& x, std::size_t d, const char* what) {
    if (x.size() != static_cast<Eigen::Index>(d)) {
        throw ArgumentError(std::string(what) + ": dimension mismatch");
    }
    if (!all_finite(x)) throw ArgumentError(std::string(what) + ": non-finite argument");
}

constexpr std::size_t kMaxDenseFourthDim = 16;

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

LogisticModel::LogisticModel(Dataset data) : data_(std::move(data)) { data_.validate(); }

Vector LogisticModel::margins(const Vector& b) const {
    require_point(b, dim(), "logistic model");
    return data_.features * b;
}

double LogisticModel::value(const Vector& b) const {
    const Vector t = margins(b);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        sum += data_.labels[static_cast<std::size_t>(i)] ? softplus(-t(i)) : softplus(t(i));
    }
    return sum / n();
}

Vector LogisticModel::gradient(const Vector& b) const {
    const Vector t = margins(b);
    Vector r(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        // sigma(t) - y, written so that neither branch cancels.
        r(i) = data_.labels[static_cast<std::size_t>(i)] ? -sigmoid(-t(i)) : sigmoid(t(i));
    }
    return data_.features.transpose() * r / n();
}

Matrix LogisticModel::hessian(const Vector& b) const {
    const Vector t = margins(b);
    Vector w(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) w(i) = sigmoid_d1(t(i));
    Matrix h = data_.features.transpose() * w.asDiagonal() * data_.features / n();
    return 0.5 * (h + h.transpose());
}

double LogisticModel::third_contract(const Vector& b, const Vector& u) const {
    const Vector t = margins(b);
    const Vector p = data_.features * u;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) sum += sigmoid_d2(t(i)) * p(i) * p(i) * p(i);
    return sum / n();
}

double LogisticModel::fourth_contract(const Vector& b, const Vector& u) const {
    const Vector t = margins(b);
    const Vector p = data_.features * u;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double p2 = p(i) * p(i);
        sum += sigmoid_d3(t(i)) * p2 * p2;
    }
    return sum / n();
}

Vector LogisticModel::third_contract_vector(const Vector& b, const Vector& u) const {
    const Vector t = margins(b);
    const Vector p = data_.features * u;
    Vector w(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) w(i) = sigmoid_d2(t(i)) * p(i) * p(i);
    return data_.features.transpose() * w / n();
}

Vector LogisticModel::fourth_contract_vector(const Vector& b, const Vector& u) const {
    const Vector t = margins(b);
    const Vector p = data_.features * u;
    Vector w(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) w(i) = sigmoid_d3(t(i)) * p(i) * p(i) * p(i);
    return data_.features.transpose() * w / n();
}

std::optional<SymTensor3> LogisticModel::third_tensor(const Vector& b) const {
    if (dim() > kMaxDenseDim) return std::nullopt;
    const Vector t = margins(b);
    Vector w(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) w(i) = sigmoid_d2(t(i)) / n();
    return SymTensor3::sum_of_cubes(data_.features.transpose(), w);
}

std::optional<SymTensor4> LogisticModel::fourth_tensor(const Vector& b) const {
    if (dim() > kMaxDenseFourthDim) return std::nullopt;
    const Vector t = margins(b);
    Vector w(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) w(i) = sigmoid_d3(t(i)) / n();
    return SymTensor4::sum_of_fourth_powers(data_.features.transpose(), w);
}

std::optional<RankOneStructure> LogisticModel::rank_one_third(const Vector& b) const {
    const Vector t = margins(b);
    RankOneStructure r;
    r.weights.resize(t.size());
    // V = n v, so the 1/n of v cancels.
    for (Eigen::Index i = 0; i < t.size(); ++i) r.weights(i) = sigmoid_d2(t(i));
    r.points = data_.features.transpose();
    return r;
}

// ---------------------------------------------------------------------------
// Gaussian moments of sigmoid derivatives

GaussianMoments gaussian_sigmoid_moments(std::size_t quadrature_order) {
    if (quadrature_order < 32) throw ArgumentError("moment quadrature order must be >= 32");
    const GaussRule rule = gauss_hermite_normal(quadrature_order);
    GaussianMoments m;
    m.quadrature_order = quadrature_order;
    for (int k = 1; k <= 3; ++k) {
        for (int p = 0; p <= 4; ++p) {
            m.a[k - 1][p] = symmetric_expectation(rule, [&](double z) {
                return sigmoid_derivative(k, z) * std::pow(z, p);
            });
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Population logistic posterior

// Orthonormal frame adapted to (beta, b): X^T b = b1 Z1 + r Z2 with
// Z1 = bhat^T X, Z2 = ehat^T X.
struct PopulationLogisticModel::Frame {
    double b1 = 0.0;
    double r = 0.0;
    Vector ehat;  // empty when d == 1
};

PopulationLogisticModel::PopulationLogisticModel(std::size_t d, double n,
                                                 std::size_t quadrature_order)
    : PopulationLogisticModel(d >= 1 ? Vector(Vector::Unit(static_cast<Eigen::Index>(d), 0))
                                     : Vector(),
                              n, quadrature_order) {}

PopulationLogisticModel::PopulationLogisticModel(const Vector& beta, double n,
                                                 std::size_t quadrature_order)
    : beta_(beta), n_(n), rule_(gauss_hermite_normal(quadrature_order)) {
    if (beta_.size() < 1) throw ArgumentError("population model needs d >= 1");
    if (!all_finite(beta_) || beta_.norm() == 0.0) {
        throw ArgumentError("population model needs a finite, nonzero beta");
    }
    if (!(n_ > 0.0)) throw ArgumentError("population model needs n > 0");
    if (quadrature_order < 32) throw ArgumentError("population quadrature order must be >= 32");
}

PopulationLogisticModel::Frame PopulationLogisticModel::frame(const Vector& b) const {
    require_point(b, dim(), "population model");
    const Vector bhat = beta_ / beta_.norm();
    Frame f;
    f.b1 = bhat.dot(b);
    if (dim() == 1) return f;
    Vector perp = b - f.b1 * bhat;
    f.r = perp.norm();
    if (f.r > 1e-300) {
        f.ehat = perp / f.r;
        return f;
    }
    f.r = 0.0;
    // Any unit vector orthogonal to beta works when b is parallel to it.
    Eigen::Index axis = 0;
    bhat.cwiseAbs().minCoeff(&axis);
    Vector e = Vector::Unit(bhat.size(), axis);
    e -= bhat.dot(e) * bhat;
    f.ehat = e / e.norm();
    return f;
}

template <class F>
double PopulationLogisticModel::expect(const Frame& f, F&& integrand) const {
    const double s = beta_.norm();
    const Eigen::Index m = rule_.nodes.size();
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double z1 = rule_.nodes(i);
        const double label = sigmoid(s * z1);
        if (f.ehat.size() == 0) {
            total += rule_.weights(i) * integrand(z1, 0.0, f.b1 * z1, label);
            continue;
        }
        double inner = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double z2 = rule_.nodes(j);
            inner += rule_.weights(j) * integrand(z1, z2, f.b1 * z1 + f.r * z2, label);
        }
        total += rule_.weights(i) * inner;
    }
    return total;
}

double PopulationLogisticModel::value(const Vector& b) const {
    const Frame f = frame(b);
    return expect(f, [](double, double, double t, double label) {
        return label * softplus(-t) + (1.0 - label) * softplus(t);
    });
}

Vector PopulationLogisticModel::gradient(const Vector& b) const {
    const Frame f = frame(b);
    const Vector bhat = beta_ / beta_.norm();
    const double g1 = expect(f, [](double z1, double, double t, double label) {
        return (sigmoid(t) - label) * z1;
    });
    Vector out = g1 * bhat;
    if (f.ehat.size() != 0) {
        const double g2 = expect(f, [](double, double z2, double t, double label) {
            return (sigmoid(t) - label) * z2;
        });
        out += g2 * f.ehat;
    }
    return out;
}

Matrix PopulationLogisticModel::hessian(const Vector& b) const {
    const Frame f = frame(b);
    const Vector bhat = beta_ / beta_.norm();
    const double h11 = expect(f, [](double z1, double, double t, double) {
        return sigmoid_d1(t) * z1 * z1;
    });
    Matrix h = h11 * bhat * bhat.transpose();
    if (f.ehat.size() == 0) return h;
    const double h12 = expect(f, [](double z1, double z2, double t, double) {
        return sigmoid_d1(t) * z1 * z2;
    });
    const double h22 = expect(f, [](double, double z2, double t, double) {
        return sigmoid_d1(t) * z2 * z2;
    });
    const double h00 = expect(f, [](double, double, double t, double) { return sigmoid_d1(t); });
    const auto d = static_cast<Eigen::Index>(dim());
    const Matrix rest = Matrix::Identity(d, d) - bhat * bhat.transpose() - f.ehat * f.ehat.transpose();
    h += h12 * (bhat * f.ehat.transpose() + f.ehat * bhat.transpose()) +
         h22 * f.ehat * f.ehat.transpose() + h00 * rest;
    return 0.5 * (h + h.transpose());
}

namespace {

// u = u1 bhat + ue ehat + rest, with gamma^2 = |rest|^2.
struct Split {
    double u1 = 0.0;
    double ue = 0.0;
    Vector rest;
    double gamma2 = 0.0;
};

Split split_direction(const Vector& u, const Vector& bhat, const Vector& ehat) {
    Split s;
    s.u1 = bhat.dot(u);
    s.rest = u - s.u1 * bhat;
    if (ehat.size() != 0) {
        s.ue = ehat.dot(u);
        s.rest -= s.ue * ehat;
    }
    s.gamma2 = s.rest.squaredNorm();
    return s;
}

}  // namespace

double PopulationLogisticModel::third_contract(const Vector& b, const Vector& u) const {
    const Frame f = frame(b);
    require_point(u, dim(), "population model direction");
    const Split s = split_direction(u, beta_ / beta_.norm(), f.ehat);
    // E over the orthogonal Gaussian W of (p + gamma W)^3 = p^3 + 3 gamma^2 p.
    return expect(f, [&](double z1, double z2, double t, double) {
        const double p = s.u1 * z1 + s.ue * z2;
        return sigmoid_d2(t) * (p * p * p + 3.0 * s.gamma2 * p);
    });
}

double PopulationLogisticModel::fourth_contract(const Vector& b, const Vector& u) const {
    const Frame f = frame(b);
    require_point(u, dim(), "population model direction");
    const Split s = split_direction(u, beta_ / beta_.norm(), f.ehat);
    return expect(f, [&](double z1, double z2, double t, double) {
        const double p = s.u1 * z1 + s.ue * z2;
        const double p2 = p * p;
        return sigmoid_d3(t) * (p2 * p2 + 6.0 * s.gamma2 * p2 + 3.0 * s.gamma2 * s.gamma2);
    });
}

Vector PopulationLogisticModel::third_contract_vector(const Vector& b, const Vector& u) const {
    const Frame f = frame(b);
    require_point(u, dim(), "population model direction");
    const Vector bhat = beta_ / beta_.norm();
    const Split s = split_direction(u, bhat, f.ehat);
    auto component = [&](int axis) {
        return expect(f, [&](double z1, double z2, double t, double) {
            const double p = s.u1 * z1 + s.ue * z2;
            const double z = axis == 1 ? z1 : z2;
            return sigmoid_d2(t) * (p * p + s.gamma2) * z;
        });
    };
    Vector out = component(1) * bhat;
    if (f.ehat.size() != 0) {
        out += component(2) * f.ehat;
        const double along_rest = expect(f, [&](double z1, double z2, double t, double) {
            return sigmoid_d2(t) * (s.u1 * z1 + s.ue * z2);
        });
        out += 2.0 * along_rest * s.rest;
    }
    return out;
}

Vector PopulationLogisticModel::fourth_contract_vector(const Vector& b, const Vector& u) const {
    const Frame f = frame(b);
    require_point(u, dim(), "population model direction");
    const Vector bhat = beta_ / beta_.norm();
    const Split s = split_direction(u, bhat, f.ehat);
    auto component = [&](int axis) {
        return expect(f, [&](double z1, double z2, double t, double) {
            const double p = s.u1 * z1 + s.ue * z2;
            const double z = axis == 1 ? z1 : z2;
            return sigmoid_d3(t) * (p * p * p + 3.0 * s.gamma2 * p) * z;
        });
    };
    Vector out = component(1) * bhat;
    if (f.ehat.size() != 0) {
        out += component(2) * f.ehat;
        const double along_rest = expect(f, [&](double z1, double z2, double t, double) {
            const double p = s.u1 * z1 + s.ue * z2;
            return sigmoid_d3(t) * (3.0 * p * p + 3.0 * s.gamma2);
        });
        out += along_rest * s.rest;
    }
    return out;
}

std::optional<SymTensor3> PopulationLogisticModel::third_tensor(const Vector& b) const {
    if (dim() > kMaxDenseDim) return std::nullopt;
    const Frame f = frame(b);
    const auto d = static_cast<Eigen::Index>(dim());
    const Vector bhat = beta_ / beta_.norm();
    std::vector<Vector> axes{bhat};
    if (f.ehat.size() != 0) axes.push_back(f.ehat);
    const int na = static_cast<int>(axes.size());
    // q[a][b][c] = E sigma''(t) Z_a Z_b Z_c over the frame coordinates.
    double q[2][2][2] = {};
    for (int a = 0; a < na; ++a)
        for (int bb = 0; bb < na; ++bb)
            for (int c = 0; c < na; ++c) {
                q[a][bb][c] = expect(f, [&](double z1, double z2, double t, double) {
                    const double z[2] = {z1, z2};
                    return sigmoid_d2(t) * z[a] * z[bb] * z[c];
                });
            }
    Vector m = Vector::Zero(d);
    Matrix rest = Matrix::Identity(d, d) - bhat * bhat.transpose();
    for (int a = 0; a < na; ++a) {
        const double qa = expect(f, [&](double z1, double z2, double t, double) {
            return sigmoid_d2(t) * (a == 0 ? z1 : z2);
        });
        m += qa * axes[a];
    }
    if (f.ehat.size() != 0) rest -= f.ehat * f.ehat.transpose();
    std::vector<double> full(static_cast<std::size_t>(d * d * d), 0.0);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k) {
                double v = m(i) * rest(j, k) + m(j) * rest(i, k) + m(k) * rest(i, j);
                for (int a = 0; a < na; ++a)
                    for (int bb = 0; bb < na; ++bb)
                        for (int c = 0; c < na; ++c)
                            v += q[a][bb][c] * axes[a](i) * axes[bb](j) * axes[c](k);
                full[static_cast<std::size_t>((i * d + j) * d + k)] = v;
            }
    return SymTensor3::from_full(dim(), std::move(full), 1e-10);
}

std::optional<SymTensor4> PopulationLogisticModel::fourth_tensor(const Vector& b) const {
    if (dim() > kMaxDenseFourthDim) return std::nullopt;
    const Frame f = frame(b);
    const auto d = static_cast<Eigen::Index>(dim());
    const Vector bhat = beta_ / beta_.norm();
    std::vector<Vector> axes{bhat};
    if (f.ehat.size() != 0) axes.push_back(f.ehat);
    const int na = static_cast<int>(axes.size());
    auto moment = [&](const std::vector<int>& idx) {
        return expect(f, [&](double z1, double z2, double t, double) {
            const double z[2] = {z1, z2};
            double prod = sigmoid_d3(t);
            for (int a : idx) prod *= z[a];
            return prod;
        });
    };
    // X = P + W with W Gaussian on the complement of the frame, so the tensor is
    // E[s3 P^4] + the 6 pairings of E[s3 P P^T] with rest + E[s3] times the 3 pairings of rest.
    double q[2][2][2][2] = {};
    for (int a = 0; a < na; ++a)
        for (int bb = a; bb < na; ++bb)
            for (int c = bb; c < na; ++c)
                for (int e = c; e < na; ++e) {
                    const double v = moment({a, bb, c, e});
                    int idx[4] = {a, bb, c, e};
                    do {
                        q[idx[0]][idx[1]][idx[2]][idx[3]] = v;
                    } while (std::next_permutation(idx, idx + 4));
                }
    Matrix p2 = Matrix::Zero(d, d);
    for (int a = 0; a < na; ++a)
        for (int bb = 0; bb < na; ++bb) p2 += moment({a, bb}) * axes[a] * axes[bb].transpose();
    const double p0 = moment({});
    Matrix rest = Matrix::Identity(d, d) - bhat * bhat.transpose();
    if (f.ehat.size() != 0) rest -= f.ehat * f.ehat.transpose();
    Matrix frame_axes(d, na);
    for (int a = 0; a < na; ++a) frame_axes.col(a) = axes[a];
    std::vector<double> full(static_cast<std::size_t>(d * d * d * d), 0.0);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k)
                for (Eigen::Index l = 0; l < d; ++l) {
                    double v = p2(i, j) * rest(k, l) + p2(k, l) * rest(i, j) + p2(i, k) * rest(j, l) +
                               p2(j, l) * rest(i, k) + p2(i, l) * rest(j, k) + p2(j, k) * rest(i, l) +
                               p0 * (rest(i, j) * rest(k, l) + rest(i, k) * rest(j, l) + rest(i, l) * rest(j, k));
                    for (int a = 0; a < na; ++a)
                        for (int bb = 0; bb < na; ++bb)
                            for (int c = 0; c < na; ++c)
                                for (int e = 0; e < na; ++e)
                                    v += q[a][bb][c][e] * frame_axes(i, a) * frame_axes(j, bb) * frame_axes(k, c) *
                                         frame_axes(l, e);
                    full[static_cast<std::size_t>(((i * d + j) * d + k) * d + l)] = v;
                }
    return SymTensor4::from_full(dim(), std::move(full), 1e-10);
}

// ---------------------------------------------------------------------------
// Quartic test potential

QuarticModel::QuarticModel(Matrix h, SymTensor3 s, SymTensor4 t, double n, double cubic_scale)
    : h_(std::move(h)), s_(s.scaled(cubic_scale)), t_(std::move(t)), n_(n) {
    const auto d = static_cast<std::size_t>(h_.rows());
    if (d == 0 || h_.cols() != h_.rows()) throw ArgumentError("quartic model: H must be square");
    if (s_.dim() != d || t_.dim() != d) throw ArgumentError("quartic model: dimension mismatch");
    if (!(n_ > 0.0)) throw ArgumentError("quartic model: n must be positive");
    if (relative_asymmetry(h_) > 1e-12) throw ArgumentError("quartic model: H must be symmetric");
    h_ = 0.5 * (h_ + h_.transpose());
    try {
        cholesky_lower(h_, "quartic H");
    } catch (const DomainError&) {
        throw ArgumentError("quartic model: H must be positive definite");
    }
    HomogeneousForm neg = make_form(t_.scaled(-1.0));
    OpnormOptions options;
    options.restarts = 16;
    const double worst = sphere_maximum(neg, options).value;  // = -min <T, u^4>
    const double scale = std::max(1.0, frobenius(t_));
    const bool cubic = frobenius(s_) > 0.0;
    if (worst > 1e-12 * scale || (cubic && worst > -1e-12 * scale)) {
        throw ArgumentError(
            "quartic model is unbounded below: the quartic form must be positive on the sphere"
            " (nonnegative without a cubic term)");
    }
}

double QuarticModel::value(const Vector& x) const {
    require_point(x, dim(), "quartic model");
    return 0.5 * x.dot(h_ * x) + contract3(s_, x) / 6.0 + contract4(t_, x) / 24.0;
}

Vector QuarticModel::gradient(const Vector& x) const {
    require_point(x, dim(), "quartic model");
    return h_ * x + 0.5 * contract3_vector(s_, x) + contract4_vector(t_, x) / 6.0;
}

Matrix QuarticModel::hessian(const Vector& x) const {
    require_point(x, dim(), "quartic model");
    const Matrix tx = contract_slot(contract_slot(t_, x), x);
    return h_ + contract_slot(s_, x) + 0.5 * tx;
}

double QuarticModel::third_contract(const Vector& x, const Vector& u) const {
    require_point(x, dim(), "quartic model");
    return contract3(s_, u) + x.dot(contract4_vector(t_, u));
}

double QuarticModel::fourth_contract(const Vector& x, const Vector& u) const {
    require_point(x, dim(), "quartic model");
    return contract4(t_, u);
}

Vector QuarticModel::third_contract_vector(const Vector& x, const Vector& u) const {
    require_point(x, dim(), "quartic model");
    return contract3_vector(s_, u) + contract4_vector(t_, u, u, x);
}

Vector QuarticModel::fourth_contract_vector(const Vector& x, const Vector& u) const {
    require_point(x, dim(), "quartic model");
    return contract4_vector(t_, u);
}

std::optional<SymTensor3> QuarticModel::third_tensor(const Vector& x) const {
    require_point(x, dim(), "quartic model");
    SymTensor3 tx = contract_slot(t_, x);
    std::vector<double> full(tx.data().begin(), tx.data().end());
    for (std::size_t i = 0; i < full.size(); ++i) full[i] += s_.data()[i];
    return SymTensor3::from_full(dim(), std::move(full));
}

std::optional<SymTensor4> QuarticModel::fourth_tensor(const Vector& x) const {
    require_point(x, dim(), "quartic model");
    return t_;
}

// ---------------------------------------------------------------------------
// Wrappers

AffineModel::AffineModel(std::shared_ptr<const Model> base, Matrix a, Vector c)
    : base_(std::move(base)), a_(std::move(a)), c_(std::move(c)) {
    if (!base_) throw ArgumentError("affine model: null base");
    const auto d = static_cast<Eigen::Index>(base_->dim());
    if (a_.rows() != d || a_.cols() != d || c_.size() != d) {
        throw ArgumentError("affine model: A must be d x d and c of length d");
    }
    if (!all_finite(a_) || !all_finite(c_)) throw ArgumentError("affine model: non-finite map");
}

double AffineModel::value(const Vector& y) const { return base_->value(to_base(y)); }
Vector AffineModel::gradient(const Vector& y) const {
    return a_.transpose() * base_->gradient(to_base(y));
}
Matrix AffineModel::hessian(const Vector& y) const {
    Matrix h = a_.transpose() * base_->hessian(to_base(y)) * a_;
    return 0.5 * (h + h.transpose());
}
double AffineModel::third_contract(const Vector& y, const Vector& u) const {
    return base_->third_contract(to_base(y), a_ * u);
}
double AffineModel::fourth_contract(const Vector& y, const Vector& u) const {
    return base_->fourth_contract(to_base(y), a_ * u);
}
Vector AffineModel::third_contract_vector(const Vector& y, const Vector& u) const {
    return a_.transpose() * base_->third_contract_vector(to_base(y), a_ * u);
}
Vector AffineModel::fourth_contract_vector(const Vector& y, const Vector& u) const {
    return a_.transpose() * base_->fourth_contract_vector(to_base(y), a_ * u);
}
std::optional<SymTensor3> AffineModel::third_tensor(const Vector& y) const {
    auto t = base_->third_tensor(to_base(y));
    if (!t) return std::nullopt;
    return t->transformed(a_);
}
std::optional<SymTensor4> AffineModel::fourth_tensor(const Vector& y) const {
    auto t = base_->fourth_tensor(to_base(y));
    if (!t) return std::nullopt;
    return t->transformed(a_);
}
std::optional<RankOneStructure> AffineModel::rank_one_third(const Vector& y) const {
    auto r = base_->rank_one_third(to_base(y));
    if (!r) return std::nullopt;
    r->points = a_.transpose() * r->points;
    return r;
}

ScaledModel::ScaledModel(std::shared_ptr<const Model> base, double lambda)
    : base_(std::move(base)), lambda_(lambda) {
    if (!base_) throw ArgumentError("scaled model: null base");
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
        throw ArgumentError("scaled model: lambda must be positive and finite");
    }
}

std::optional<SymTensor3> ScaledModel::third_tensor(const Vector& x) const {
    auto t = base_->third_tensor(x);
    if (!t) return std::nullopt;
    return t->scaled(lambda_);
}

std::optional<SymTensor4> ScaledModel::fourth_tensor(const Vector& x) const {
    auto t = base_->fourth_tensor(x);
    if (!t) return std::nullopt;
    return t->scaled(lambda_);
}

}  // namespace lapdiag
