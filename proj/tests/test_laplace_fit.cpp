#include "lapdiag/errors.hpp"
#include "lapdiag/laplace_fit.hpp"
#include "lapdiag/sigmoid.hpp"
#include "support/finite_diff.hpp"
#include "support/frozen_constants.hpp"
#include "support/tensor_oracles.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <memory>

using namespace lapdiag;
using namespace lapdiag::testing;

namespace {

SymTensor4 positive_quartic(std::size_t d, double diag = 6.0) {
    SymTensor4 t(d);
    for (std::size_t i = 0; i < d; ++i) t.set(i, i, i, i, diag);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) t.set(i, i, j, j, 1.0);
    return t;
}

// Cyclic coordinate Newton on v, an independent and slow route to the MLE.
Vector coordinate_descent(const LogisticModel& m) {
    const Dataset& data = m.data();
    const auto d = static_cast<Eigen::Index>(data.d());
    Vector b = Vector::Zero(d);
    for (int sweep = 0; sweep < 5000; ++sweep) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            for (int inner = 0; inner < 3; ++inner) {
                const Vector t = data.features * b;
                double g = 0.0, h = 0.0;
                for (Eigen::Index i = 0; i < t.size(); ++i) {
                    const double x = data.features(i, j);
                    g += (sigmoid(t(i)) - data.labels[static_cast<std::size_t>(i)]) * x;
                    h += sigmoid_d1(t(i)) * x * x;
                }
                const double step = g / h;
                b(j) -= step;
                change = std::max(change, std::abs(step));
            }
        }
        if (change < 1e-14) break;
    }
    return b;
}

}  // namespace

TEST(FindMode, QuadraticInAtMostTwoIterations) {
    Rng rng(1);
    const Matrix h = random_spd(rng, 3);
    QuarticModel m(h, SymTensor3(3), SymTensor4(3), 7.0);
    const ModeResult r = find_mode(m, standard_normal_vector(rng, 3));
    EXPECT_LE(r.iterations, 2);
    EXPECT_LE(r.mode.norm(), 1e-12);
    EXPECT_TRUE(r.converged);
    const LaplaceFit f = fit(m);
    EXPECT_EQ(f.hessian_V, 7.0 * h);
}

TEST(FindMode, SeparableDataDiverges) {
    Dataset data;
    data.features.resize(4, 2);
    data.features << 1, 0.5, 2, -1, -1, 0.3, -2, -0.4;
    data.labels = {1, 1, 0, 0};
    LogisticModel m(data);
    EXPECT_THROW(find_mode(m, Vector::Zero(2)), ModeDivergedError);
    EXPECT_THROW(fit(m), NumericalError);
}

TEST(FindMode, LogisticMatchesCoordinateDescent) {
    LogisticModel m(generate_dataset(4, 200, Vector::Unit(4, 0), 1));
    const LaplaceFit f = fit(m);
    EXPECT_LE(f.grad_norm, 1e-9);
    EXPECT_LE((f.mode - coordinate_descent(m)).norm(), 1e-6);
    EXPECT_GT(f.lambda_min_Hv, 0.0);
    EXPECT_NEAR(f.lambda_min_Hv, min_eigenvalue(m.hessian(f.mode)), 1e-14);
    EXPECT_LE(f.n * f.grad_norm, 1e-9 * (1.0 + f.n * m.gradient(Vector::Zero(4)).norm()));
}

TEST(FindMode, RejectsBadStart) {
    LogisticModel m(generate_dataset(2, 50, Vector::Unit(2, 0), 2));
    EXPECT_THROW(find_mode(m, Vector::Zero(3)), ArgumentError);
    Vector bad = Vector::Zero(2);
    bad(0) = INFINITY;
    EXPECT_THROW(find_mode(m, bad), ArgumentError);
}

TEST(Fit, PopulationHessianIsDiagonalAtBeta) {
    PopulationLogisticModel m(4, 1e4);
    const LaplaceFit f = fit(m, Vector::Unit(4, 0));
    EXPECT_LE((f.mode - Vector::Unit(4, 0)).norm(), 1e-9);
    EXPECT_NEAR(f.hessian_V(0, 0), 1e4 * kA12, 1e-5);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(f.hessian_V(i, i), 1e4 * kA10, 1e-5);
    EXPECT_NEAR(f.hessian_V(0, 2), 0.0, 1e-8);
    // Started away from beta the search still lands there.
    const LaplaceFit g = fit(m);
    EXPECT_LE((g.mode - Vector::Unit(4, 0)).norm(), 1e-8);
}

TEST(Whitening, GaussianCase) {
    Rng rng(3);
    const Matrix h = random_spd(rng, 3);
    QuarticModel m(h, SymTensor3(3), SymTensor4(3), 20.0);
    const LaplaceFit f = fit(m);
    EXPECT_EQ(whitened_potential(f, m, Vector::Zero(3)), f.n * m.value(f.mode));
    for (int trial = 0; trial < 5; ++trial) {
        const Vector z = standard_normal_vector(rng, 3);
        EXPECT_NEAR(whitened_excess(f, m, z), 0.5 * z.squaredNorm(), 1e-12 * (1 + z.squaredNorm()));
        EXPECT_NEAR(r3(f, m, z), 0.0, 1e-12);
        EXPECT_NEAR(r4(f, m, z), 0.0, 1e-12);
    }
}

TEST(Whitening, UnitHessianByFiniteDifferences) {
    LogisticModel m(generate_dataset(3, 300, Vector::Unit(3, 0), 4));
    const LaplaceFit f = fit(m);
    const double h = 1e-3;
    Matrix fd(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            Vector ei = Vector::Zero(3), ej = Vector::Zero(3);
            ei(i) = h;
            ej(j) = h;
            fd(i, j) = (whitened_potential(f, m, ei + ej) - whitened_potential(f, m, ei - ej) -
                        whitened_potential(f, m, ej - ei) + whitened_potential(f, m, -ei - ej)) /
                       (4 * h * h);
        }
    }
    EXPECT_LE((fd - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-4);
    Rng rng(5);
    const Vector z = standard_normal_vector(rng, 3);
    Vector g(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        Vector e = Vector::Zero(3);
        e(i) = 1e-5;
        g(i) = (whitened_potential(f, m, z + e) - whitened_potential(f, m, z - e)) / 2e-5;
    }
    EXPECT_LE((whitened_gradient(f, m, z) - g).norm(), 1e-5 * (1 + g.norm()));
}

TEST(Remainders, QuarticClosedForm) {
    Rng rng(6);
    const Matrix h = random_spd(rng, 3);
    const SymTensor3 s = random_sym3(rng, 3, 0.3);
    const SymTensor4 t = positive_quartic(3);
    const double n = 50.0;
    QuarticModel m(h, s, t, n, 0.5);
    const LaplaceFit f = fit(m);
    ASSERT_LE(f.mode.norm(), 1e-14);
    EXPECT_EQ(r3(f, m, Vector::Zero(3)), 0.0);
    EXPECT_EQ(r4(f, m, Vector::Zero(3)), 0.0);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector z = standard_normal_vector(rng, 3);
        const Vector x = f.whitening * z;
        const double cubic = n * 0.5 * naive_contract3(s, x) / 6.0;
        const double quartic = n * naive_contract4(t, x) / 24.0;
        EXPECT_NEAR(r3(f, m, z), cubic + quartic, 1e-10);
        EXPECT_NEAR(r4(f, m, z), quartic, 1e-10);
    }
}

TEST(Remainders, WhitenedThirdNormIsC3OverRootN) {
    Rng rng(7);
    for (std::size_t d : {2, 3}) {
        const Matrix h = random_spd(rng, static_cast<Eigen::Index>(d));
        const SymTensor3 s = random_sym3(rng, d);
        const double n = 30.0;
        QuarticModel m(h, s, positive_quartic(d), n);
        const LaplaceFit f = fit(m);
        const SymTensor3 w = m.third_tensor(f.mode)->transformed(f.whitening).scaled(n);
        const double lhs = opnorm_sphere(w).value;
        const double c3 = weighted_opnorm(*m.third_tensor(f.mode), m.hessian(f.mode)).value;
        EXPECT_NEAR(lhs, c3 / std::sqrt(n), 1e-6 * lhs);
    }
}

TEST(FitJson, FieldsAndPrecision) {
    LogisticModel m(generate_dataset(2, 100, Vector::Unit(2, 0), 8));
    const LaplaceFit f = fit(m);
    const auto j = nlohmann::json::parse(fit_to_json(f));
    for (const char* key : {"d", "n", "mode", "hessian_chol", "lambda_min", "grad_norm", "iterations"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["mode"][0].get<double>(), f.mode(0));
    EXPECT_EQ(j["hessian_chol"][1][0].get<double>(), f.chol(1, 0));
}
