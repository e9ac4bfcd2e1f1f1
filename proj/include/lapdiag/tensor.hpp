#pragma once

#include "lapdiag/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lapdiag {

/// Dense symmetric order-3 tensor with full d^3 storage, index (i, j, k) at
/// i*d*d + j*d + k. Every mutation writes the whole permutation orbit, so the
/// stored array is exactly symmetric.
class SymTensor3 {
public:
    SymTensor3() = default;
    explicit SymTensor3(std::size_t dim);

    /// Builds from a full array that is symmetric up to `tol` relative to the
    /// largest entry, then averages each orbit. Throws ArgumentError on
    /// asymmetry, wrong size or non-finite entries.
    static SymTensor3 from_full(std::size_t dim, std::vector<double> entries,
                                double tol = 1e-12);

    /// Sum_l weights[l] * (column l of points)^{(x)3}, points is d x m.
    static SymTensor3 sum_of_cubes(const Matrix& points, const Vector& weights);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dim_ + j) * dim_ + k];
    }
    /// Assigns `value` to (i, j, k) and every permutation of it.
    void set(std::size_t i, std::size_t j, std::size_t k, double value);

    std::span<const double> data() const { return data_; }

    SymTensor3 scaled(double factor) const;

    /// Returns S[M., M., M.], entry (a,b,c) = sum_ijk S_ijk M_ia M_jb M_kc.
    SymTensor3 transformed(const Matrix& m) const;

    /// d^2 x d row-major view used for batched contractions.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    unfolded() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// Dense symmetric order-4 tensor, full d^4 storage.
class SymTensor4 {
public:
    SymTensor4() = default;
    explicit SymTensor4(std::size_t dim);

    static SymTensor4 from_full(std::size_t dim, std::vector<double> entries,
                                double tol = 1e-12);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[((i * dim_ + j) * dim_ + k) * dim_ + l];
    }
    void set(std::size_t i, std::size_t j, std::size_t k, std::size_t l, double value);

    std::span<const double> data() const { return data_; }

    /// Sum_l weights[l] * (column l of points)^{(x)4}.
    static SymTensor4 sum_of_fourth_powers(const Matrix& points, const Vector& weights);

    SymTensor4 scaled(double factor) const;
    SymTensor4 transformed(const Matrix& m) const;

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    unfolded() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

// Contractions. All throw ArgumentError on dimension mismatch.

/// <S, u^{(x)3}>.
double contract3(const SymTensor3& s, const Vector& u);
/// Vector with entries sum_jk S_ijk u_j u_k, i.e. grad <S, u^3> / 3.
Vector contract3_vector(const SymTensor3& s, const Vector& u);
/// <S, A>_i = sum_jk S_ijk A_jk. A must be symmetric to 1e-10 relative.
Vector contract_matrix(const SymTensor3& s, const Matrix& a);
/// Identity contraction <S, I>_i = sum_j S_ijj.
Vector trace_vector(const SymTensor3& s);
double frobenius(const SymTensor3& s);
/// <S, z_b^3> for every column z_b of the d x m matrix `z`, via one GEMM.
Vector contract3_columns(const SymTensor3& s, const Matrix& z);

double contract4(const SymTensor4& t, const Vector& u);
/// sum_jkl T_ijkl u_j u_k u_l.
Vector contract4_vector(const SymTensor4& t, const Vector& u);
double frobenius(const SymTensor4& t);
/// Vector sum_jkl T_ijkl a_j b_k c_l.
Vector contract4_vector(const SymTensor4& t, const Vector& a, const Vector& b, const Vector& c);
/// Matrix sum_k S_ijk x_k.
Matrix contract_slot(const SymTensor3& s, const Vector& x);
/// Order-3 tensor sum_l T_ijkl x_l.
SymTensor3 contract_slot(const SymTensor4& t, const Vector& x);

/// A homogeneous polynomial u -> f(u) of degree `order` together with its
/// gradient. Operator-norm estimation only needs this interface, so forms
/// backed by model contractions never materialize a dense tensor.
struct HomogeneousForm {
    std::size_t dim = 0;
    int order = 3;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

HomogeneousForm make_form(const SymTensor3& s);
HomogeneousForm make_form(const SymTensor4& t);
/// w -> form(M w); M is d x d.
HomogeneousForm compose_linear(HomogeneousForm form, const Matrix& m);

struct OpnormOptions {
    int restarts = 32;
    double initial_step = 0.1;
    int max_iterations = 500;
    double move_tolerance = 1e-10;
    std::uint64_t seed = 0;
};

/// Best value of sup_{|u|=1} |f(u)| found by multistart projected-gradient
/// ascent. Always a lower bound on the true operator norm.
struct OpnormEstimate {
    double value = 0.0;
    Vector argmax;
    bool converged = true;
    int iterations = 0;
};

OpnormEstimate opnorm_sphere(const HomogeneousForm& form, const OpnormOptions& options = {});
/// Best value of sup_{|u|=1} f(u) (signed, no absolute value).
OpnormEstimate sphere_maximum(const HomogeneousForm& form, const OpnormOptions& options = {});

OpnormEstimate opnorm_sphere(const SymTensor3& s, const OpnormOptions& options = {});
OpnormEstimate opnorm_sphere(const SymTensor4& t, const OpnormOptions& options = {});

/// ||S||_H = sup_{u^T H u = 1} |<S, u^k>|, computed by whitening with the
/// Cholesky factor of H. Throws DomainError when H is not PD.
OpnormEstimate weighted_opnorm(const SymTensor3& s, const Matrix& h,
                               const OpnormOptions& options = {});
OpnormEstimate weighted_opnorm(const SymTensor4& t, const Matrix& h,
                               const OpnormOptions& options = {});

/// Same norm with an explicit factor M satisfying M M^T = H^{-1}.
OpnormEstimate weighted_opnorm_with_factor(const SymTensor3& s, const Matrix& factor,
                                           const OpnormOptions& options = {});

}  // namespace lapdiag
