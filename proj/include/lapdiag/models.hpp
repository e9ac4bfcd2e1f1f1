#pragma once

#include "lapdiag/quadrature.hpp"
#include "lapdiag/tensor.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lapdiag {

/// Logistic regression data: rows of `features` are the X_i.
struct Dataset {
    Matrix features;                // n x d
    std::vector<int> labels;        // n entries in {0, 1}

    std::size_t d() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t n() const { return static_cast<std::size_t>(features.rows()); }
    /// Throws ArgumentError unless sizes agree, n, d >= 1, labels are 0/1
    /// and every feature is finite.
    void validate() const;
};

/// X_i ~ N(0, I_d), Y_i ~ Bernoulli(sigma(beta^T X_i)), all from one stream.
Dataset generate_dataset(std::size_t d, std::size_t n, const Vector& beta, std::uint64_t seed);

/// CSV with header `y,x1,...,xd`, labels 0/1, features printed with 17
/// significant digits, LF line endings.
void write_dataset_csv(std::ostream& out, const Dataset& data);
/// Parses the same format. Malformed input throws ArgumentError naming the
/// offending line.
Dataset read_dataset_csv(std::istream& in);

/// Third derivative of V = n v written as sum_l weights[l] * points.col(l)^{(x)3}.
struct RankOneStructure {
    Vector weights;
    Matrix points;  // d x m
};

/// Potential v with V = n v the negative log posterior. Contractions are the
/// primitive capability; dense tensors and rank-one structure are optional.
class Model {
public:
    virtual ~Model() = default;

    virtual std::size_t dim() const = 0;
    /// Sample-size scale n. Real valued so that (lambda v, n / lambda)
    /// rescalings stay exact.
    virtual double n() const = 0;

    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual Matrix hessian(const Vector& x) const = 0;
    /// <grad^3 v(x), u^3>.
    virtual double third_contract(const Vector& x, const Vector& u) const = 0;
    /// <grad^4 v(x), u^4>.
    virtual double fourth_contract(const Vector& x, const Vector& u) const = 0;
    /// Vector sum_jk grad^3 v(x)_ijk u_j u_k (one third of the u-gradient).
    virtual Vector third_contract_vector(const Vector& x, const Vector& u) const = 0;
    /// Vector sum_jkl grad^4 v(x)_ijkl u_j u_k u_l.
    virtual Vector fourth_contract_vector(const Vector& x, const Vector& u) const = 0;

    virtual std::optional<SymTensor3> third_tensor(const Vector&) const { return std::nullopt; }
    virtual std::optional<SymTensor4> fourth_tensor(const Vector&) const { return std::nullopt; }
    virtual std::optional<RankOneStructure> rank_one_third(const Vector&) const {
        return std::nullopt;
    }

    virtual std::string name() const = 0;
};

/// Dense tensors are only materialized up to this dimension.
inline constexpr std::size_t kMaxDenseDim = 64;

/// Flat-prior logistic regression, v(b) = -(1/n) sum_i log p(Y_i | X_i, b).
class LogisticModel final : public Model {
public:
    explicit LogisticModel(Dataset data);

    std::size_t dim() const override { return data_.d(); }
    double n() const override { return static_cast<double>(data_.n()); }
    double value(const Vector& b) const override;
    Vector gradient(const Vector& b) const override;
    Matrix hessian(const Vector& b) const override;
    double third_contract(const Vector& b, const Vector& u) const override;
    double fourth_contract(const Vector& b, const Vector& u) const override;
    Vector third_contract_vector(const Vector& b, const Vector& u) const override;
    Vector fourth_contract_vector(const Vector& b, const Vector& u) const override;
    std::optional<SymTensor3> third_tensor(const Vector& b) const override;
    std::optional<SymTensor4> fourth_tensor(const Vector& b) const override;
    std::optional<RankOneStructure> rank_one_third(const Vector& b) const override;
    std::string name() const override { return "logistic"; }

    const Dataset& data() const { return data_; }

private:
    Vector margins(const Vector& b) const;

    Dataset data_;
};

/// a[k][p] = E sigma^{(k)}(Z) Z^p, k = 1..3, p = 0..4 (index k-1).
struct GaussianMoments {
    std::array<std::array<double, 5>, 3> a{};
    std::size_t quadrature_order = 0;

    double at(int k, int p) const { return a[k - 1][p]; }
};

/// Paired Gauss-Hermite evaluation; exactly zero on odd integrands.
GaussianMoments gaussian_sigmoid_moments(std::size_t quadrature_order = 128);

/// Idealized population potential
///   v(b) = E[sigma(beta^T X) softplus(-X^T b) + sigma(-beta^T X) softplus(X^T b)],
/// X ~ N(0, I_d), minimized at b = beta. Expectations reduce to two Gaussian
/// coordinates (along beta and along the part of the argument orthogonal to
/// beta) and use a tensor Gauss-Hermite rule.
class PopulationLogisticModel final : public Model {
public:
    PopulationLogisticModel(std::size_t d, double n, std::size_t quadrature_order = 128);
    PopulationLogisticModel(const Vector& beta, double n, std::size_t quadrature_order = 128);

    std::size_t dim() const override { return static_cast<std::size_t>(beta_.size()); }
    double n() const override { return n_; }
    double value(const Vector& b) const override;
    Vector gradient(const Vector& b) const override;
    Matrix hessian(const Vector& b) const override;
    double third_contract(const Vector& b, const Vector& u) const override;
    double fourth_contract(const Vector& b, const Vector& u) const override;
    Vector third_contract_vector(const Vector& b, const Vector& u) const override;
    Vector fourth_contract_vector(const Vector& b, const Vector& u) const override;
    std::optional<SymTensor3> third_tensor(const Vector& b) const override;
    std::optional<SymTensor4> fourth_tensor(const Vector& b) const override;
    std::string name() const override { return "population"; }

    const Vector& beta() const { return beta_; }

private:
    struct Frame;
    Frame frame(const Vector& b) const;
    template <class F>
    double expect(const Frame& f, F&& integrand) const;

    Vector beta_;
    double n_;
    GaussRule rule_;
};

/// v(x) = x^T H x / 2 + (cubic_scale / 6) <S, x^3> + <T, x^4> / 24.
class QuarticModel final : public Model {
public:
    /// Rejects non-PD H and configurations that are unbounded below: the
    /// sphere minimum of <T, u^4> must be >= 0, and > 0 when the cubic term
    /// is present. The minimum is found with the multistart ascent.
    QuarticModel(Matrix h, SymTensor3 s, SymTensor4 t, double n, double cubic_scale = 1.0);

    std::size_t dim() const override { return static_cast<std::size_t>(h_.rows()); }
    double n() const override { return n_; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Matrix hessian(const Vector& x) const override;
    double third_contract(const Vector& x, const Vector& u) const override;
    double fourth_contract(const Vector& x, const Vector& u) const override;
    Vector third_contract_vector(const Vector& x, const Vector& u) const override;
    Vector fourth_contract_vector(const Vector& x, const Vector& u) const override;
    std::optional<SymTensor3> third_tensor(const Vector& x) const override;
    std::optional<SymTensor4> fourth_tensor(const Vector& x) const override;
    std::string name() const override { return "quartic"; }

private:
    Matrix h_;
    SymTensor3 s_;  // already multiplied by cubic_scale
    SymTensor4 t_;
    double n_;
};

/// y -> v(A y + c). Used for affine-invariance checks.
class AffineModel final : public Model {
public:
    AffineModel(std::shared_ptr<const Model> base, Matrix a, Vector c);

    std::size_t dim() const override { return static_cast<std::size_t>(a_.cols()); }
    double n() const override { return base_->n(); }
    double value(const Vector& y) const override;
    Vector gradient(const Vector& y) const override;
    Matrix hessian(const Vector& y) const override;
    double third_contract(const Vector& y, const Vector& u) const override;
    double fourth_contract(const Vector& y, const Vector& u) const override;
    Vector third_contract_vector(const Vector& y, const Vector& u) const override;
    Vector fourth_contract_vector(const Vector& y, const Vector& u) const override;
    std::optional<SymTensor3> third_tensor(const Vector& y) const override;
    std::optional<SymTensor4> fourth_tensor(const Vector& y) const override;
    std::optional<RankOneStructure> rank_one_third(const Vector& y) const override;
    std::string name() const override { return "affine(" + base_->name() + ")"; }

    /// Maps a point of this model to the base model's coordinates.
    Vector to_base(const Vector& y) const { return a_ * y + c_; }

private:
    std::shared_ptr<const Model> base_;
    Matrix a_;
    Vector c_;
};

/// (lambda v, n / lambda): the same V = n v under a different split.
class ScaledModel final : public Model {
public:
    ScaledModel(std::shared_ptr<const Model> base, double lambda);

    std::size_t dim() const override { return base_->dim(); }
    double n() const override { return base_->n() / lambda_; }
    double value(const Vector& x) const override { return lambda_ * base_->value(x); }
    Vector gradient(const Vector& x) const override { return lambda_ * base_->gradient(x); }
    Matrix hessian(const Vector& x) const override { return lambda_ * base_->hessian(x); }
    double third_contract(const Vector& x, const Vector& u) const override {
        return lambda_ * base_->third_contract(x, u);
    }
    double fourth_contract(const Vector& x, const Vector& u) const override {
        return lambda_ * base_->fourth_contract(x, u);
    }
    Vector third_contract_vector(const Vector& x, const Vector& u) const override {
        return lambda_ * base_->third_contract_vector(x, u);
    }
    Vector fourth_contract_vector(const Vector& x, const Vector& u) const override {
        return lambda_ * base_->fourth_contract_vector(x, u);
    }
    std::optional<SymTensor3> third_tensor(const Vector& x) const override;
    std::optional<SymTensor4> fourth_tensor(const Vector& x) const override;
    std::optional<RankOneStructure> rank_one_third(const Vector& x) const override {
        return base_->rank_one_third(x);
    }
    std::string name() const override { return base_->name(); }

private:
    std::shared_ptr<const Model> base_;
    double lambda_;
};

}  // namespace lapdiag
