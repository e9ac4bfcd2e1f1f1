#include "lapdiag/errors.hpp"
#include "lapdiag/tensor.hpp"
#include "support/tensor_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lapdiag;
using lapdiag::testing::grid_sphere_max;
using lapdiag::testing::random_spd;
using lapdiag::testing::random_sym3;
using lapdiag::testing::random_sym4;
using lapdiag::testing::random_symmetric;

namespace {

SymTensor3 generator111(std::size_t d, double value) {
    SymTensor3 s(d);
    s.set(0, 0, 0, value);
    return s;
}


}  // namespace

TEST(SymTensor3, SetWritesWholeOrbit) {
    SymTensor3 s(3);
    s.set(0, 1, 2, 1.5);
    EXPECT_EQ(s(2, 1, 0), 1.5);
    EXPECT_EQ(s(1, 0, 2), 1.5);
    EXPECT_EQ(s(0, 0, 0), 0.0);
}

TEST(SymTensor3, FromFullRejectsAsymmetry) {
    std::vector<double> full(8, 0.0);
    full[1] = 1.0;  // (0,0,1) without its permutations
    EXPECT_THROW(SymTensor3::from_full(2, full), ArgumentError);
    EXPECT_THROW(SymTensor3::from_full(2, std::vector<double>(7, 0.0)), ArgumentError);
    std::vector<double> bad(8, 0.0);
    bad[0] = std::nan("");
    EXPECT_THROW(SymTensor3::from_full(2, bad), ArgumentError);
}

TEST(SymTensor3, FromFullKeepsSymmetricInputExact) {
    Rng rng(3);
    SymTensor3 s = random_sym3(rng, 4);
    std::vector<double> full(s.data().begin(), s.data().end());
    SymTensor3 t = SymTensor3::from_full(4, full);
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(t.data()[i], full[i]);
}

TEST(Contract3, Monomial) {
    Vector u = Vector::Zero(4);
    u(0) = 2.0;
    EXPECT_DOUBLE_EQ(contract3(generator111(4, 1.0), u), 8.0);
    EXPECT_EQ(contract3(generator111(4, 1.0), Vector::Zero(4)), 0.0);
}

TEST(Contract3, MatchesNaiveLoop) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        SymTensor3 s = random_sym3(rng, 3);
        Vector u = standard_normal_vector(rng, 3);
        const double oracle = lapdiag::testing::naive_contract3(s, u);
        EXPECT_LE(std::abs(contract3(s, u) - oracle), 1e-12 * std::abs(oracle) + 1e-14);
        const double c = 1.7;
        EXPECT_NEAR(contract3(s, c * u), c * c * c * contract3(s, u), 1e-11 * std::abs(oracle));
    }
}

TEST(Contract3, DimensionMismatch) {
    EXPECT_THROW(contract3(SymTensor3(3), Vector::Zero(2)), ArgumentError);
    EXPECT_THROW(contract_matrix(SymTensor3(3), Matrix::Identity(2, 2)), ArgumentError);
}

TEST(Contract3, VectorIsScaledGradient) {
    Rng rng(5);
    SymTensor3 s = random_sym3(rng, 5);
    Vector u = standard_normal_vector(rng, 5);
    Vector g = contract3_vector(s, u);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 5; ++i) {
        Vector e = Vector::Zero(5);
        e(i) = h;
        const double fd = (contract3(s, u + e) - contract3(s, u - e)) / (2 * h);
        EXPECT_NEAR(3.0 * g(i), fd, 1e-6 * (1 + std::abs(fd)));
    }
}

TEST(ContractMatrix, Examples) {
    Vector v = contract_matrix(generator111(3, 1.0), Matrix::Identity(3, 3));
    EXPECT_EQ(v(0), 1.0);
    EXPECT_EQ(v(1), 0.0);
    EXPECT_EQ(v(2), 0.0);
    EXPECT_EQ(contract_matrix(SymTensor3(3), Matrix::Identity(3, 3)).norm(), 0.0);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 1.0;
    EXPECT_THROW(contract_matrix(SymTensor3(3), asym), ArgumentError);
}

TEST(ContractMatrix, MatchesNaiveLoop) {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        SymTensor3 s = random_sym3(rng, 4);
        Matrix a = random_symmetric(rng, 4);
        Vector oracle = lapdiag::testing::naive_contract_matrix(s, a);
        EXPECT_LE((contract_matrix(s, a) - oracle).norm(), 1e-12 * oracle.norm());
        EXPECT_LE((trace_vector(s) - contract_matrix(s, Matrix::Identity(4, 4))).norm(), 1e-12);
    }
}

TEST(Frobenius, Examples) {
    EXPECT_DOUBLE_EQ(frobenius(generator111(3, 1.0)), 1.0);
    SymTensor3 s(3);
    s.set(0, 1, 2, 1.0);
    EXPECT_DOUBLE_EQ(frobenius(s), std::sqrt(6.0));
    Rng rng(2);
    SymTensor3 r = random_sym3(rng, 4);
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t k = 0; k < 4; ++k) sum += r(i, j, k) * r(i, j, k);
    EXPECT_NEAR(frobenius(r), std::sqrt(sum), 1e-12 * std::sqrt(sum));
}

TEST(Transform, MatchesNaiveLoop) {
    Rng rng(21);
    SymTensor3 s = random_sym3(rng, 4);
    Matrix m(4, 4);
    fill_standard_normal(rng, m);
    SymTensor3 fast = s.transformed(m);
    SymTensor3 slow = lapdiag::testing::naive_transform(s, m);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(fast.data()[i], slow.data()[i], 1e-11);
    Vector u = standard_normal_vector(rng, 4);
    EXPECT_NEAR(contract3(fast, u), contract3(s, m * u), 1e-10);
}

TEST(Transform, Order4MatchesComposition) {
    Rng rng(22);
    SymTensor4 t = random_sym4(rng, 3);
    Matrix m(3, 3);
    fill_standard_normal(rng, m);
    SymTensor4 tt = t.transformed(m);
    for (int trial = 0; trial < 5; ++trial) {
        Vector u = standard_normal_vector(rng, 3);
        EXPECT_NEAR(contract4(tt, u), lapdiag::testing::naive_contract4(t, m * u),
                    1e-10 * (1 + std::abs(contract4(tt, u))));
    }
}

TEST(SumOfCubes, MatchesExplicitSum) {
    Rng rng(23);
    Matrix pts(3, 700);
    fill_standard_normal(rng, pts);
    Vector w = standard_normal_vector(rng, 700);
    SymTensor3 s = SymTensor3::sum_of_cubes(pts, w);
    Vector u = standard_normal_vector(rng, 3);
    double direct = 0.0;
    for (Eigen::Index l = 0; l < 700; ++l) direct += w(l) * std::pow(pts.col(l).dot(u), 3);
    EXPECT_NEAR(contract3(s, u), direct, 1e-10 * (1 + std::abs(direct)));
}

TEST(Contract4, MatchesNaiveLoop) {
    Rng rng(31);
    SymTensor4 t = random_sym4(rng, 3);
    Vector u = standard_normal_vector(rng, 3);
    const double oracle = lapdiag::testing::naive_contract4(t, u);
    EXPECT_NEAR(contract4(t, u), oracle, 1e-12 * (1 + std::abs(oracle)));
    SymTensor4 diag(2);
    diag.set(0, 0, 1, 1, 1.0);
    EXPECT_DOUBLE_EQ(frobenius(diag), std::sqrt(6.0));
}

TEST(Opnorm, AxisGenerator) {
    OpnormEstimate est = opnorm_sphere(generator111(4, 2.5));
    EXPECT_NEAR(est.value, 2.5, 1e-10);
    EXPECT_NEAR(std::abs(est.argmax(0)), 1.0, 1e-6);
    EXPECT_EQ(opnorm_sphere(SymTensor3(4)).value, 0.0);
    OpnormOptions bad;
    bad.restarts = 0;
    EXPECT_THROW(opnorm_sphere(SymTensor3(2), bad), ArgumentError);
}

TEST(Opnorm, MatchesGridOracleD3) {
    Rng rng(41);
    for (int trial = 0; trial < 3; ++trial) {
        SymTensor3 s = random_sym3(rng, 3);
        OpnormOptions opts;
        opts.seed = static_cast<std::uint64_t>(trial);
        const double est = opnorm_sphere(s, opts).value;
        const double grid = grid_sphere_max(3, [&](const Vector& u) { return contract3(s, u); });
        EXPECT_NEAR(est, grid, 1e-6 * (1 + grid));
    }
}

TEST(Opnorm, Order4MatchesGridOracleD2) {
    Rng rng(42);
    SymTensor4 t = random_sym4(rng, 2);
    const double est = opnorm_sphere(t).value;
    const double grid = grid_sphere_max(2, [&](const Vector& u) { return contract4(t, u); });
    EXPECT_NEAR(est, grid, 1e-6 * (1 + grid));
}

TEST(WeightedOpnorm, IdentityAndScaling) {
    Rng rng(51);
    SymTensor3 s = random_sym3(rng, 3);
    EXPECT_NEAR(weighted_opnorm(s, Matrix::Identity(3, 3)).value, opnorm_sphere(s).value, 1e-12);
    EXPECT_NEAR(weighted_opnorm(generator111(3, 1.0), 4.0 * Matrix::Identity(3, 3)).value, 0.125,
                1e-12);
    Matrix not_pd = Matrix::Identity(3, 3);
    not_pd(2, 2) = -1.0;
    EXPECT_THROW(weighted_opnorm(s, not_pd), DomainError);
}

TEST(WeightedOpnorm, MatchesEllipsoidGridAndIsFactorInvariant) {
    Rng rng(52);
    for (int trial = 0; trial < 3; ++trial) {
        SymTensor3 s = random_sym3(rng, 3);
        Matrix h = random_spd(rng, 3);
        const double est = weighted_opnorm(s, h).value;
        const double grid = grid_sphere_max(3, [&](const Vector& w) {
            return contract3(s, w) / std::pow(w.dot(h * w), 1.5);
        });
        EXPECT_NEAR(est, grid, 1e-5 * (1 + grid));
        const double sym = weighted_opnorm_with_factor(s, symmetric_inverse_sqrt(h)).value;
        EXPECT_NEAR(sym, est, 1e-8 * est);
    }
}

TEST(NormInequalities, ContractMatrixAndFrobeniusBoundedByOpnorm) {
    Rng rng(21);
    for (int trial = 0; trial < 112; ++trial) {
        const std::size_t d = 2 + static_cast<std::size_t>(trial % 7);
        const SymTensor3 s = random_sym3(rng, d);
        const Matrix a = random_symmetric(rng, static_cast<Eigen::Index>(d));
        const double op = d <= 3 ? grid_sphere_max(d, [&](const Vector& u) { return contract3(s, u); }, 300)
                                 : opnorm_sphere(s, {64, 0.1, 500, 1e-10, static_cast<std::uint64_t>(trial)}).value;
        const double a_op = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().cwiseAbs().maxCoeff();
        const double dd = static_cast<double>(d);
        EXPECT_LE(contract_matrix(s, a).norm(), dd * a_op * op) << trial;
        EXPECT_LE(frobenius(s), dd * op) << trial;
    }
}
