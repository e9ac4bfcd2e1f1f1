#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cstddef>

namespace lapdiag {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Lower Cholesky factor of an SPD matrix. Throws DomainError when
/// the factorization fails.
Matrix cholesky_lower(const Matrix& h, const char* what = "matrix");

/// Returns M = L^{-T} for lower-triangular L, so that M M^T = (L L^T)^{-1}.
/// Columns of M map whitened coordinates back to the original ones.
Matrix inverse_transpose_factor(const Matrix& lower);

/// Solves L^T x = z for lower-triangular L (i.e. x = L^{-T} z).
Vector solve_upper_transpose(const Matrix& lower, const Vector& z);

/// Solves L x = y for lower-triangular L.
Vector solve_lower(const Matrix& lower, const Vector& y);

/// Symmetric square root inverse H^{-1/2} through an eigendecomposition.
Matrix symmetric_inverse_sqrt(const Matrix& h);

double min_eigenvalue(const Matrix& symmetric);

/// Max absolute asymmetry relative to max(1, max |A_ij|).
double relative_asymmetry(const Matrix& a);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

}  // namespace lapdiag
