#include "lapdiag/linalg.hpp"

#include "lapdiag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lapdiag {

Matrix cholesky_lower(const Matrix& h, const char* what) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw ArgumentError(std::string(what) + " must be square and non-empty");
    }
    if (!all_finite(h)) {
        throw DomainError(std::string(what) + " has non-finite entries");
    }
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) {
        throw DomainError(std::string(what) + " is not positive definite");
    }
    Matrix lower = llt.matrixL();
    if (lower.diagonal().minCoeff() <= 0.0) {
        throw DomainError(std::string(what) + " is not positive definite");
    }
    return lower;
}

Matrix inverse_transpose_factor(const Matrix& lower) {
    const Eigen::Index d = lower.rows();
    Matrix identity = Matrix::Identity(d, d);
    return lower.transpose().triangularView<Eigen::Upper>().solve(identity);
}

Vector solve_upper_transpose(const Matrix& lower, const Vector& z) {
    return lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

Vector solve_lower(const Matrix& lower, const Vector& y) {
    return lower.triangularView<Eigen::Lower>().solve(y);
}

Matrix symmetric_inverse_sqrt(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
        throw DomainError("matrix is not positive definite");
    }
    Vector inv_root = eig.eigenvalues().array().rsqrt();
    return eig.eigenvectors() * inv_root.asDiagonal() * eig.eigenvectors().transpose();
}

double min_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

double relative_asymmetry(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace lapdiag
