#include "lapdiag/tensor.hpp"

#include "lapdiag/errors.hpp"
#include "lapdiag/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>

namespace lapdiag {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t ipow(std::size_t base, int exponent) {
    std::size_t out = 1;
    for (int i = 0; i < exponent; ++i) out *= base;
    return out;
}

void require_dim(std::size_t expected, Eigen::Index actual, const char* what) {
    if (static_cast<Eigen::Index>(expected) != actual) {
        throw ArgumentError(std::string(what) + ": dimension mismatch (tensor dim " +
                            std::to_string(expected) + ", got " + std::to_string(actual) + ")");
    }
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void check_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) throw ArgumentError("tensor has non-finite entries");
    }
}

// Averages each permutation orbit. Orbits whose stored entries already agree
// are left untouched so exactly symmetric inputs stay bit-identical.
void symmetrize3(std::size_t d, std::vector<double>& data) {
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> double& {
        return data[(i * d + j) * d + k];
    };
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            for (std::size_t k = j; k < d; ++k) {
                std::array<double*, 6> orbit{&at(i, j, k), &at(i, k, j), &at(j, i, k),
                                             &at(j, k, i), &at(k, i, j), &at(k, j, i)};
                bool equal = true;
                double sum = 0.0;
                for (double* p : orbit) {
                    sum += *p;
                    equal = equal && (*p == *orbit[0]);
                }
                if (equal) continue;
                const double mean = sum / 6.0;
                for (double* p : orbit) *p = mean;
            }
        }
    }
}

double max_asymmetry3(std::size_t d, const std::vector<double>& data) {
    double worst = 0.0;
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * d + j) * d + k];
    };
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                const double v = at(i, j, k);
                worst = std::max({worst, std::abs(v - at(j, i, k)), std::abs(v - at(i, k, j)),
                                  std::abs(v - at(k, j, i))});
            }
    return worst;
}

template <class F>
void for_each_permutation4(std::size_t i, std::size_t j, std::size_t k, std::size_t l, F&& f) {
    std::array<std::size_t, 4> idx{i, j, k, l};
    std::sort(idx.begin(), idx.end());
    do {
        f(idx[0], idx[1], idx[2], idx[3]);
    } while (std::next_permutation(idx.begin(), idx.end()));
}

void symmetrize4(std::size_t d, std::vector<double>& data) {
    auto at = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) -> double& {
        return data[((i * d + j) * d + k) * d + l];
    };
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            for (std::size_t k = j; k < d; ++k)
                for (std::size_t l = k; l < d; ++l) {
                    const double first = at(i, j, k, l);
                    double sum = 0.0;
                    int count = 0;
                    bool equal = true;
                    for_each_permutation4(i, j, k, l, [&](auto a, auto b, auto c, auto e) {
                        const double v = at(a, b, c, e);
                        sum += v;
                        ++count;
                        equal = equal && (v == first);
                    });
                    if (equal) continue;
                    const double mean = sum / count;
                    for_each_permutation4(i, j, k, l,
                                          [&](auto a, auto b, auto c, auto e) { at(a, b, c, e) = mean; });
                }
}

double max_asymmetry4(std::size_t d, const std::vector<double>& data) {
    double worst = 0.0;
    auto at = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data[((i * d + j) * d + k) * d + l];
    };
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l) {
                    const double v = at(i, j, k, l);
                    worst = std::max({worst, std::abs(v - at(j, i, k, l)),
                                      std::abs(v - at(i, k, j, l)), std::abs(v - at(i, j, l, k)),
                                      std::abs(v - at(l, j, k, i))});
                }
    return worst;
}

// Applies M to every slot of an order-K tensor by K rounds of
// "contract the last index, then rotate it to the front".
std::vector<double> transform_slots(std::size_t d, int order, const std::vector<double>& data,
                                    const Matrix& m) {
    const auto rows = static_cast<Eigen::Index>(ipow(d, order - 1));
    const auto cols = static_cast<Eigen::Index>(d);
    RowMatrix x = Eigen::Map<const RowMatrix>(data.data(), rows, cols);
    for (int round = 0; round < order; ++round) {
        RowMatrix y = x * m;
        RowMatrix rotated = y.transpose();
        x = Eigen::Map<const RowMatrix>(rotated.data(), rows, cols);
    }
    return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// SymTensor3

SymTensor3::SymTensor3(std::size_t dim) : dim_(dim), data_(ipow(dim, 3), 0.0) {
    if (dim == 0) throw ArgumentError("tensor dimension must be positive");
}

SymTensor3 SymTensor3::from_full(std::size_t dim, std::vector<double> entries, double tol) {
    if (dim == 0) throw ArgumentError("tensor dimension must be positive");
    if (entries.size() != ipow(dim, 3)) throw ArgumentError("order-3 tensor needs d^3 entries");
    check_finite(entries);
    const double scale = max_abs(entries);
    if (max_asymmetry3(dim, entries) > tol * scale) {
        throw ArgumentError("order-3 tensor entries are not symmetric");
    }
    symmetrize3(dim, entries);
    SymTensor3 out;
    out.dim_ = dim;
    out.data_ = std::move(entries);
    return out;
}

SymTensor3 SymTensor3::sum_of_cubes(const Matrix& points, const Vector& weights) {
    const Eigen::Index d = points.rows();
    const Eigen::Index m = points.cols();
    if (d == 0) throw ArgumentError("tensor dimension must be positive");
    require_dim(static_cast<std::size_t>(m), weights.size(), "sum_of_cubes weights");
    RowMatrix unfolded = RowMatrix::Zero(d * d, d);
    constexpr Eigen::Index kChunk = 512;
    Matrix outer(d * d, kChunk);
    for (Eigen::Index start = 0; start < m; start += kChunk) {
        const Eigen::Index len = std::min(kChunk, m - start);
        for (Eigen::Index c = 0; c < len; ++c) {
            const auto p = points.col(start + c);
            for (Eigen::Index i = 0; i < d; ++i) {
                outer.col(c).segment(i * d, d) = p(i) * p;
            }
        }
        Matrix weighted = (points.middleCols(start, len) *
                           weights.segment(start, len).asDiagonal()).transpose();
        unfolded.noalias() += outer.leftCols(len) * weighted;
    }
    std::vector<double> entries(unfolded.data(), unfolded.data() + unfolded.size());
    check_finite(entries);
    symmetrize3(static_cast<std::size_t>(d), entries);
    SymTensor3 out;
    out.dim_ = static_cast<std::size_t>(d);
    out.data_ = std::move(entries);
    return out;
}

void SymTensor3::set(std::size_t i, std::size_t j, std::size_t k, double value) {
    if (i >= dim_ || j >= dim_ || k >= dim_) throw ArgumentError("tensor index out of range");
    if (!std::isfinite(value)) throw ArgumentError("tensor entries must be finite");
    const std::size_t d = dim_;
    for (auto [a, b, c] : {std::array{i, j, k}, std::array{i, k, j}, std::array{j, i, k},
                           std::array{j, k, i}, std::array{k, i, j}, std::array{k, j, i}}) {
        data_[(a * d + b) * d + c] = value;
    }
}

SymTensor3 SymTensor3::scaled(double factor) const {
    SymTensor3 out = *this;
    for (double& x : out.data_) x *= factor;
    return out;
}

SymTensor3 SymTensor3::transformed(const Matrix& m) const {
    if (m.rows() != static_cast<Eigen::Index>(dim_) || m.cols() != m.rows()) {
        throw ArgumentError("transform must be a square d x d matrix");
    }
    std::vector<double> entries = transform_slots(dim_, 3, data_, m);
    check_finite(entries);
    symmetrize3(dim_, entries);
    SymTensor3 out;
    out.dim_ = dim_;
    out.data_ = std::move(entries);
    return out;
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
SymTensor3::unfolded() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    return {data_.data(), d * d, d};
}

// ---------------------------------------------------------------------------
// SymTensor4

SymTensor4::SymTensor4(std::size_t dim) : dim_(dim), data_(ipow(dim, 4), 0.0) {
    if (dim == 0) throw ArgumentError("tensor dimension must be positive");
}

SymTensor4 SymTensor4::from_full(std::size_t dim, std::vector<double> entries, double tol) {
    if (dim == 0) throw ArgumentError("tensor dimension must be positive");
    if (entries.size() != ipow(dim, 4)) throw ArgumentError("order-4 tensor needs d^4 entries");
    check_finite(entries);
    if (max_asymmetry4(dim, entries) > tol * max_abs(entries)) {
        throw ArgumentError("order-4 tensor entries are not symmetric");
    }
    symmetrize4(dim, entries);
    SymTensor4 out;
    out.dim_ = dim;
    out.data_ = std::move(entries);
    return out;
}

void SymTensor4::set(std::size_t i, std::size_t j, std::size_t k, std::size_t l, double value) {
    if (i >= dim_ || j >= dim_ || k >= dim_ || l >= dim_) {
        throw ArgumentError("tensor index out of range");
    }
    if (!std::isfinite(value)) throw ArgumentError("tensor entries must be finite");
    const std::size_t d = dim_;
    for_each_permutation4(i, j, k, l, [&](auto a, auto b, auto c, auto e) {
        data_[((a * d + b) * d + c) * d + e] = value;
    });
}

SymTensor4 SymTensor4::sum_of_fourth_powers(const Matrix& points, const Vector& weights) {
    const Eigen::Index d = points.rows();
    const Eigen::Index m = points.cols();
    if (d == 0) throw ArgumentError("tensor dimension must be positive");
    require_dim(static_cast<std::size_t>(m), weights.size(), "sum_of_fourth_powers weights");
    RowMatrix unfolded = RowMatrix::Zero(d * d * d, d);
    constexpr Eigen::Index kChunk = 256;
    Matrix outer(d * d * d, kChunk);
    for (Eigen::Index start = 0; start < m; start += kChunk) {
        const Eigen::Index len = std::min(kChunk, m - start);
        for (Eigen::Index c = 0; c < len; ++c) {
            const auto p = points.col(start + c);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j)
                    outer.col(c).segment((i * d + j) * d, d) = (p(i) * p(j)) * p;
        }
        Matrix weighted = (points.middleCols(start, len) *
                           weights.segment(start, len).asDiagonal()).transpose();
        unfolded.noalias() += outer.leftCols(len) * weighted;
    }
    std::vector<double> entries(unfolded.data(), unfolded.data() + unfolded.size());
    check_finite(entries);
    symmetrize4(static_cast<std::size_t>(d), entries);
    SymTensor4 out;
    out.dim_ = static_cast<std::size_t>(d);
    out.data_ = std::move(entries);
    return out;
}

SymTensor4 SymTensor4::scaled(double factor) const {
    SymTensor4 out = *this;
    for (double& x : out.data_) x *= factor;
    return out;
}

SymTensor4 SymTensor4::transformed(const Matrix& m) const {
    if (m.rows() != static_cast<Eigen::Index>(dim_) || m.cols() != m.rows()) {
        throw ArgumentError("transform must be a square d x d matrix");
    }
    std::vector<double> entries = transform_slots(dim_, 4, data_, m);
    check_finite(entries);
    symmetrize4(dim_, entries);
    SymTensor4 out;
    out.dim_ = dim_;
    out.data_ = std::move(entries);
    return out;
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
SymTensor4::unfolded() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    return {data_.data(), d * d * d, d};
}

// ---------------------------------------------------------------------------
// Contractions

namespace {

// Y[i][j] = sum_k S_ijk u_k.
RowMatrix contract_last3(const SymTensor3& s, const Vector& u) {
    const auto d = static_cast<Eigen::Index>(s.dim());
    Vector y = s.unfolded() * u;
    return Eigen::Map<const RowMatrix>(y.data(), d, d);
}

RowMatrix contract_last_two4(const SymTensor4& t, const Vector& u) {
    const auto d = static_cast<Eigen::Index>(t.dim());
    Vector y = t.unfolded() * u;
    Vector y2 = Eigen::Map<const RowMatrix>(y.data(), d * d, d) * u;
    return Eigen::Map<const RowMatrix>(y2.data(), d, d);
}

}  // namespace

double contract3(const SymTensor3& s, const Vector& u) {
    require_dim(s.dim(), u.size(), "contract3");
    return u.dot(contract_last3(s, u) * u);
}

Vector contract3_vector(const SymTensor3& s, const Vector& u) {
    require_dim(s.dim(), u.size(), "contract3_vector");
    return contract_last3(s, u) * u;
}

Vector contract_matrix(const SymTensor3& s, const Matrix& a) {
    require_dim(s.dim(), a.rows(), "contract_matrix");
    require_dim(s.dim(), a.cols(), "contract_matrix");
    if (relative_asymmetry(a) > 1e-10) throw ArgumentError("contract_matrix: A is not symmetric");
    const auto d = static_cast<Eigen::Index>(s.dim());
    Eigen::Map<const RowMatrix> rows(s.data().data(), d, d * d);
    Eigen::Map<const Vector> flat(a.data(), d * d);
    return rows * flat;
}

Vector trace_vector(const SymTensor3& s) {
    const std::size_t d = s.dim();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out(static_cast<Eigen::Index>(i)) += s(i, j, j);
    return out;
}

Vector contract3_columns(const SymTensor3& s, const Matrix& z) {
    require_dim(s.dim(), z.rows(), "contract3_columns");
    const auto d = static_cast<Eigen::Index>(s.dim());
    const Matrix y = s.unfolded() * z;  // row (i*d + j), column b
    Vector out(z.cols());
    for (Eigen::Index b = 0; b < z.cols(); ++b) {
        Eigen::Map<const RowMatrix> yb(y.col(b).data(), d, d);
        out(b) = z.col(b).dot(yb * z.col(b));
    }
    return out;
}

double frobenius(const SymTensor3& s) {
    double sum = 0.0;
    for (double x : s.data()) sum += x * x;
    return std::sqrt(sum);
}

double contract4(const SymTensor4& t, const Vector& u) {
    require_dim(t.dim(), u.size(), "contract4");
    return u.dot(contract_last_two4(t, u) * u);
}

Vector contract4_vector(const SymTensor4& t, const Vector& u) {
    require_dim(t.dim(), u.size(), "contract4_vector");
    return contract_last_two4(t, u) * u;
}

Vector contract4_vector(const SymTensor4& t, const Vector& a, const Vector& b, const Vector& c) {
    require_dim(t.dim(), a.size(), "contract4_vector");
    require_dim(t.dim(), b.size(), "contract4_vector");
    require_dim(t.dim(), c.size(), "contract4_vector");
    const auto d = static_cast<Eigen::Index>(t.dim());
    Vector y = t.unfolded() * c;
    Vector y2 = Eigen::Map<const RowMatrix>(y.data(), d * d, d) * b;
    return Eigen::Map<const RowMatrix>(y2.data(), d, d) * a;
}

Matrix contract_slot(const SymTensor3& s, const Vector& x) {
    require_dim(s.dim(), x.size(), "contract_slot");
    const auto d = static_cast<Eigen::Index>(s.dim());
    Vector y = s.unfolded() * x;
    Matrix out = Eigen::Map<const RowMatrix>(y.data(), d, d);
    return 0.5 * (out + out.transpose());
}

SymTensor3 contract_slot(const SymTensor4& t, const Vector& x) {
    require_dim(t.dim(), x.size(), "contract_slot");
    Vector y = t.unfolded() * x;
    std::vector<double> entries(y.data(), y.data() + y.size());
    check_finite(entries);
    symmetrize3(t.dim(), entries);
    return SymTensor3::from_full(t.dim(), std::move(entries));
}

double frobenius(const SymTensor4& t) {
    double sum = 0.0;
    for (double x : t.data()) sum += x * x;
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Forms and operator norms

HomogeneousForm make_form(const SymTensor3& s) {
    auto shared = std::make_shared<const SymTensor3>(s);
    HomogeneousForm form;
    form.dim = s.dim();
    form.order = 3;
    form.value = [shared](const Vector& u) { return contract3(*shared, u); };
    form.gradient = [shared](const Vector& u) -> Vector { return 3.0 * contract3_vector(*shared, u); };
    return form;
}

HomogeneousForm make_form(const SymTensor4& t) {
    auto shared = std::make_shared<const SymTensor4>(t);
    HomogeneousForm form;
    form.dim = t.dim();
    form.order = 4;
    form.value = [shared](const Vector& u) { return contract4(*shared, u); };
    form.gradient = [shared](const Vector& u) -> Vector { return 4.0 * contract4_vector(*shared, u); };
    return form;
}

HomogeneousForm compose_linear(HomogeneousForm form, const Matrix& m) {
    if (m.rows() != static_cast<Eigen::Index>(form.dim)) {
        throw ArgumentError("compose_linear: dimension mismatch");
    }
    auto inner = std::make_shared<const HomogeneousForm>(std::move(form));
    auto map = std::make_shared<const Matrix>(m);
    HomogeneousForm out;
    out.dim = static_cast<std::size_t>(m.cols());
    out.order = inner->order;
    out.value = [inner, map](const Vector& w) { return inner->value(*map * w); };
    out.gradient = [inner, map](const Vector& w) -> Vector {
        return map->transpose() * inner->gradient(*map * w);
    };
    return out;
}

namespace {

struct AscentResult {
    double value;
    Vector point;
    bool converged;
    int iterations;
};

// Maximizes sign * f over the unit sphere from `start`.
AscentResult ascend(const HomogeneousForm& form, double sign, Vector u,
                    const OpnormOptions& options) {
    constexpr double kArmijo = 1e-4;
    constexpr int kMaxHalvings = 60;
    double f = sign * form.value(u);
    auto tangent = [&](const Vector& point) -> Vector {
        Vector g = sign * form.gradient(point);
        return g - g.dot(point) * point;
    };
    Vector gt = tangent(u);
    double gnorm = gt.norm();
    double step = gnorm > 0.0 ? options.initial_step / gnorm : 0.0;
    bool converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (!(gnorm > 0.0)) {
            converged = true;
            break;
        }
        bool accepted = false;
        Vector candidate;
        double fc = f;
        for (int h = 0; h < kMaxHalvings; ++h) {
            candidate = (u + step * gt).normalized();
            fc = sign * form.value(candidate);
            if (fc >= f + kArmijo * step * gnorm * gnorm) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No ascent direction left at working precision.
            converged = true;
            break;
        }
        const double moved = (candidate - u).norm();
        u = std::move(candidate);
        f = fc;
        gt = tangent(u);
        gnorm = gt.norm();
        if (moved < options.move_tolerance) {
            converged = true;
            ++it;
            break;
        }
        step *= 2.0;
    }
    return {f, std::move(u), converged, it};
}

}  // namespace

namespace {

OpnormEstimate multistart(const HomogeneousForm& form, const OpnormOptions& options,
                          std::initializer_list<double> signs) {
    if (options.restarts < 1) throw ArgumentError("opnorm: restarts must be >= 1");
    if (form.dim == 0) throw ArgumentError("opnorm: empty form");
    const auto d = static_cast<Eigen::Index>(form.dim);
    OpnormEstimate best;
    best.value = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        Rng rng = make_stream(options.seed, static_cast<std::uint64_t>(r));
        const Vector start = random_unit_vector(rng, d);
        for (double sign : signs) {
            AscentResult run = ascend(form, sign, start, options);
            best.iterations += run.iterations;
            if (run.value > best.value) {
                best.value = run.value;
                best.argmax = sign > 0 ? run.point : Vector(-run.point);
                best.converged = run.converged;
            }
        }
    }
    return best;
}

}  // namespace

OpnormEstimate sphere_maximum(const HomogeneousForm& form, const OpnormOptions& options) {
    return multistart(form, options, {1.0});
}

OpnormEstimate opnorm_sphere(const HomogeneousForm& form, const OpnormOptions& options) {
    // The two sign runs cover max f and max -f, so their best is sup |f|.
    OpnormEstimate best = multistart(form, options, {1.0, -1.0});
    best.value = std::max(best.value, 0.0);
    return best;
}

OpnormEstimate opnorm_sphere(const SymTensor3& s, const OpnormOptions& options) {
    return opnorm_sphere(make_form(s), options);
}

OpnormEstimate opnorm_sphere(const SymTensor4& t, const OpnormOptions& options) {
    return opnorm_sphere(make_form(t), options);
}

OpnormEstimate weighted_opnorm(const SymTensor3& s, const Matrix& h, const OpnormOptions& options) {
    require_dim(s.dim(), h.rows(), "weighted_opnorm");
    const Matrix lower = cholesky_lower(h, "weighting matrix");
    return opnorm_sphere(s.transformed(inverse_transpose_factor(lower)), options);
}

OpnormEstimate weighted_opnorm(const SymTensor4& t, const Matrix& h, const OpnormOptions& options) {
    require_dim(t.dim(), h.rows(), "weighted_opnorm");
    const Matrix lower = cholesky_lower(h, "weighting matrix");
    return opnorm_sphere(t.transformed(inverse_transpose_factor(lower)), options);
}

OpnormEstimate weighted_opnorm_with_factor(const SymTensor3& s, const Matrix& factor,
                                           const OpnormOptions& options) {
    require_dim(s.dim(), factor.rows(), "weighted_opnorm_with_factor");
    return opnorm_sphere(s.transformed(factor), options);
}

}  // namespace lapdiag
