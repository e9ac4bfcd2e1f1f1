#include "lapdiag/errors.hpp"
#include "lapdiag/models.hpp"
#include "lapdiag/sigmoid.hpp"
#include "support/finite_diff.hpp"
#include "support/frozen_constants.hpp"
#include "support/tensor_oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace lapdiag;
using namespace lapdiag::testing;

namespace {

void expect_model_consistent(const Model& m, const Vector& x, const Vector& u, double tol_third) {
    const Vector g = m.gradient(x);
    const Vector fg = fd_gradient(m, x);
    EXPECT_LE((g - fg).norm(), 1e-5 * std::max(1e-3, g.norm())) << m.name();
    const Matrix h = m.hessian(x);
    EXPECT_LE((h - h.transpose()).norm(), 1e-14 * h.norm());
    EXPECT_LE((h - fd_hessian(m, x)).norm(), 1e-5 * std::max(1e-3, h.norm())) << m.name();
    const double t3 = m.third_contract(x, u);
    EXPECT_LE(std::abs(t3 - fd_third_directional(m, x, u)), tol_third * std::max(1e-3, std::abs(t3)))
        << m.name();
    const double t4 = m.fourth_contract(x, u);
    EXPECT_LE(std::abs(t4 - fd_fourth_directional(m, x, u)), tol_third * std::max(1e-3, std::abs(t4)))
        << m.name();
    // Contraction vectors are the u-gradients divided by the order.
    const double hstep = 1e-5;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        Vector e = Vector::Zero(u.size());
        e(i) = hstep;
        const double fd3 = (m.third_contract(x, u + e) - m.third_contract(x, u - e)) / (2 * hstep);
        const double fd4 = (m.fourth_contract(x, u + e) - m.fourth_contract(x, u - e)) / (2 * hstep);
        EXPECT_NEAR(3.0 * m.third_contract_vector(x, u)(i), fd3, 1e-6 * (1 + std::abs(fd3)));
        EXPECT_NEAR(4.0 * m.fourth_contract_vector(x, u)(i), fd4, 1e-6 * (1 + std::abs(fd4)));
    }
    if (auto dense = m.third_tensor(x)) {
        EXPECT_NEAR(contract3(*dense, u), t3, 1e-10 * (1 + std::abs(t3)));
    }
    if (auto dense = m.fourth_tensor(x)) {
        EXPECT_NEAR(contract4(*dense, u), t4, 1e-10 * (1 + std::abs(t4)));
    }
}

Dataset separable() {
    Dataset data;
    data.features.resize(4, 2);
    data.features << 1, 0.5, 2, -1, -1, 0.3, -2, -0.4;
    data.labels = {1, 1, 0, 0};
    return data;
}

}  // namespace

TEST(Sigmoid, StableTails) {
    EXPECT_EQ(sigmoid(0.0), 0.5);
    EXPECT_GT(sigmoid(-800.0), -1.0);
    EXPECT_EQ(sigmoid(800.0), 1.0);
    EXPECT_NEAR(softplus(-50.0), std::exp(-50.0), 1e-30);
    EXPECT_NEAR(softplus(50.0), 50.0, 1e-12);
    EXPECT_NEAR(sigmoid_d1(40.0), std::exp(-40.0), 1e-25);
    for (double t : {-3.0, -0.2, 0.7, 5.0}) {
        EXPECT_EQ(sigmoid_d2(-t), -sigmoid_d2(t));
        const double h = 1e-5;
        EXPECT_NEAR(sigmoid_d2(t), (sigmoid_d1(t + h) - sigmoid_d1(t - h)) / (2 * h), 1e-9);
        EXPECT_NEAR(sigmoid_d3(t), (sigmoid_d2(t + h) - sigmoid_d2(t - h)) / (2 * h), 1e-9);
    }
}

TEST(Dataset, GenerateDeterministicAndBalanced) {
    const Dataset a = generate_dataset(3, 1000, Vector::Unit(3, 0), 5);
    const Dataset b = generate_dataset(3, 1000, Vector::Unit(3, 0), 5);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    const std::size_t n = 100000;
    const Dataset zero = generate_dataset(2, n, Vector::Zero(2), 1);
    double mean = 0.0;
    for (int y : zero.labels) mean += y;
    mean /= static_cast<double>(n);
    EXPECT_LE(std::abs(mean - 0.5), 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
    const Dataset tilted = generate_dataset(2, n, Vector::Unit(2, 0), 2);
    mean = 0.0;
    for (int y : tilted.labels) mean += y;
    mean /= static_cast<double>(n);
    EXPECT_LE(std::abs(mean - 0.5), 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(Dataset, CsvRoundTripIsByteIdentical) {
    const Dataset a = generate_dataset(3, 25, Vector::Unit(3, 0), 9);
    std::ostringstream first;
    write_dataset_csv(first, a);
    EXPECT_EQ(first.str().substr(0, 9), "y,x1,x2,x");
    std::istringstream in(first.str());
    const Dataset b = read_dataset_csv(in);
    EXPECT_EQ(a.features, b.features);
    std::ostringstream second;
    write_dataset_csv(second, b);
    EXPECT_EQ(first.str(), second.str());
}

TEST(Dataset, CsvRejectsMalformedInput) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_dataset_csv(in);
    };
    EXPECT_THROW(parse(""), ArgumentError);
    EXPECT_THROW(parse("y,x1\n"), ArgumentError);
    EXPECT_THROW(parse("y,x2\n1,0.5\n"), ArgumentError);
    EXPECT_THROW(parse("y,x1\n2,0.5\n"), ArgumentError);
    EXPECT_THROW(parse("y,x1\n1,abc\n"), ArgumentError);
    try {
        parse("y,x1\n1,0.5\n0,1,2\n");
        FAIL();
    } catch (const ArgumentError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Logistic, ValueAtZeroIsLog2) {
    LogisticModel m(generate_dataset(3, 40, Vector::Unit(3, 0), 1));
    EXPECT_NEAR(m.value(Vector::Zero(3)), std::log(2.0), 1e-15);
    Vector bad = Vector::Zero(3);
    bad(1) = std::nan("");
    EXPECT_THROW(m.value(bad), ArgumentError);
}

TEST(Logistic, FiniteDifferenceConsistency) {
    LogisticModel m(generate_dataset(3, 50, Vector::Unit(3, 0), 2));
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector b = standard_normal_vector(rng, 3);
        const Vector u = standard_normal_vector(rng, 3);
        expect_model_consistent(m, b, u, 1e-3);
    }
}

TEST(Logistic, ConvexEverywhere) {
    LogisticModel m(generate_dataset(4, 60, Vector::Unit(4, 0), 4));
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector b = 3.0 * standard_normal_vector(rng, 4);
        EXPECT_GE(min_eigenvalue(m.hessian(b)), -1e-10);
    }
}

TEST(Logistic, RankOneStructureMatchesDenseTensor) {
    LogisticModel m(generate_dataset(3, 50, Vector::Unit(3, 0), 6));
    Rng rng(7);
    const Vector b = standard_normal_vector(rng, 3);
    auto r = m.rank_one_third(b);
    ASSERT_TRUE(r.has_value());
    const SymTensor3 from_rank_one = SymTensor3::sum_of_cubes(r->points, r->weights);
    const SymTensor3 dense = *m.third_tensor(b);
    for (std::size_t i = 0; i < 27; ++i) {
        EXPECT_NEAR(from_rank_one.data()[i], m.n() * dense.data()[i], 1e-12);
    }
}

TEST(GaussianMoments, OddVanishAndPinned) {
    const GaussianMoments m = gaussian_sigmoid_moments(128);
    EXPECT_EQ(m.at(1, 1), 0.0);
    EXPECT_EQ(m.at(1, 3), 0.0);
    EXPECT_EQ(m.at(2, 0), 0.0);
    EXPECT_EQ(m.at(2, 2), 0.0);
    EXPECT_EQ(m.at(2, 4), 0.0);
    EXPECT_GT(m.at(1, 0), 0.0);
    EXPECT_GT(m.at(1, 2), 0.0);
    EXPECT_NEAR(m.at(1, 0), kA10, 1e-13);
    EXPECT_NEAR(m.at(1, 2), kA12, 1e-13);
    EXPECT_NEAR(m.at(1, 4), kA14, 1e-13);
    EXPECT_NEAR(m.at(2, 1), kA21, 1e-13);
    EXPECT_NEAR(m.at(2, 3), kA23, 1e-13);
    EXPECT_NEAR(m.at(3, 0), kA30, 1e-13);
    EXPECT_NEAR(m.at(3, 2), kA32, 1e-13);
    EXPECT_NEAR(m.at(3, 4), kA34, 1e-13);
    const GaussianMoments doubled = gaussian_sigmoid_moments(256);
    for (int k = 1; k <= 3; ++k)
        for (int p = 0; p <= 4; ++p) EXPECT_LT(std::abs(doubled.at(k, p) - m.at(k, p)), 1e-10);
    EXPECT_THROW(gaussian_sigmoid_moments(16), ArgumentError);
}

TEST(GaussianMoments, AgreeWithAdaptiveQuadrature) {
    const GaussianMoments m = gaussian_sigmoid_moments(128);
    using boost::math::quadrature::gauss_kronrod;
    for (auto [k, p] : {std::pair{1, 0}, {1, 2}, {2, 1}, {2, 3}}) {
        auto f = [k = k, p = p](double z) {
            return sigmoid_derivative(k, z) * std::pow(z, p) * std::exp(-0.5 * z * z) /
                   std::sqrt(2.0 * std::numbers::pi);
        };
        const double adaptive = gauss_kronrod<double, 31>::integrate(f, -12.0, 12.0, 15, 1e-14);
        EXPECT_NEAR(m.at(k, p), adaptive, 1e-9);
    }
}

TEST(Population, ModeHessianAndThirdAtBeta) {
    PopulationLogisticModel m(4, 1.0);
    const Vector beta = Vector::Unit(4, 0);
    EXPECT_LE(m.gradient(beta).norm(), 1e-13);
    const Matrix h = m.hessian(beta);
    EXPECT_NEAR(h(0, 0), kA12, 1e-9);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(h(i, i), kA10, 1e-9);
    EXPECT_NEAR(h(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(h(2, 3), 0.0, 1e-12);
    EXPECT_NEAR(m.third_contract(beta, Vector::Unit(4, 1)), 0.0, 1e-14);
    Vector b(4);
    b << 0.7, -0.3, 0.5, 1.1;
    const double tail = b.tail(3).squaredNorm();
    EXPECT_NEAR(m.third_contract(beta, b), kA23 * std::pow(0.7, 3) + 3 * kA21 * 0.7 * tail, 1e-9);
    EXPECT_THROW(PopulationLogisticModel(0, 1.0), ArgumentError);
}

TEST(Population, FiniteDifferenceConsistency) {
    for (std::size_t d : {1, 2, 3, 5}) {
        PopulationLogisticModel m(d, 10.0, 64);
        Rng rng(10 + d);
        for (int trial = 0; trial < 3; ++trial) {
            const Vector b = Vector::Unit(static_cast<Eigen::Index>(d), 0) +
                             0.4 * standard_normal_vector(rng, static_cast<Eigen::Index>(d));
            const Vector u = standard_normal_vector(rng, static_cast<Eigen::Index>(d));
            expect_model_consistent(m, b, u, 1e-3);
        }
    }
}

TEST(Population, RotationallySymmetricInTail) {
    PopulationLogisticModel m(4, 1.0);
    Vector x(4), u(4), v(4);
    x << 0.9, 0.2, -0.1, 0.3;
    u << 0.5, 0.1, 0.7, -0.4;
    v << 0.5, 0.7, -0.4, 0.1;
    Vector xp(4);
    xp << 0.9, -0.1, 0.3, 0.2;
    // Permuting coordinates 2..4 of both point and direction.
    EXPECT_NEAR(m.third_contract(x, u), m.third_contract(xp, v), 1e-13);
    EXPECT_NEAR(m.third_contract(Vector::Unit(4, 0), u),
                m.third_contract(Vector::Unit(4, 0), v), 1e-13);
}

TEST(Quartic, ClosedForms) {
    Rng rng(20);
    const Matrix h = random_spd(rng, 3);
    const SymTensor3 s = random_sym3(rng, 3);
    SymTensor4 t(3);
    for (std::size_t i = 0; i < 3; ++i) t.set(i, i, i, i, 6.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) t.set(i, i, j, j, 1.0);
    QuarticModel m(h, s, t, 5.0, 0.5);
    EXPECT_EQ(m.gradient(Vector::Zero(3)).norm(), 0.0);
    const Vector u = standard_normal_vector(rng, 3);
    EXPECT_NEAR(m.third_contract(Vector::Zero(3), u), 0.5 * contract3(s, u), 1e-14);
    for (int trial = 0; trial < 3; ++trial) {
        expect_model_consistent(m, standard_normal_vector(rng, 3), standard_normal_vector(rng, 3),
                                1e-5);
    }
}

TEST(Quartic, RejectsUnboundedBelow) {
    Rng rng(21);
    const Matrix h = Matrix::Identity(2, 2);
    EXPECT_THROW(QuarticModel(h, random_sym3(rng, 2), SymTensor4(2), 1.0), ArgumentError);
    SymTensor4 negative(2);
    negative.set(0, 0, 0, 0, -1.0);
    EXPECT_THROW(QuarticModel(h, SymTensor3(2), negative, 1.0), ArgumentError);
    Matrix not_pd = h;
    not_pd(1, 1) = -2.0;
    EXPECT_THROW(QuarticModel(not_pd, SymTensor3(2), SymTensor4(2), 1.0), ArgumentError);
    EXPECT_NO_THROW(QuarticModel(h, SymTensor3(2), SymTensor4(2), 1.0));
}

TEST(Wrappers, AffineAndScaledConsistency) {
    auto base = std::make_shared<LogisticModel>(generate_dataset(3, 50, Vector::Unit(3, 0), 30));
    Rng rng(31);
    Matrix a = random_spd(rng, 3);
    const Vector c = standard_normal_vector(rng, 3);
    AffineModel affine(base, a, c);
    const Vector y = 0.3 * standard_normal_vector(rng, 3);
    const Vector u = standard_normal_vector(rng, 3);
    expect_model_consistent(affine, y, u, 1e-3);
    EXPECT_NEAR(affine.value(y), base->value(a * y + c), 1e-15);
    auto r = affine.rank_one_third(y);
    ASSERT_TRUE(r.has_value());
    double direct = 0.0;
    for (Eigen::Index l = 0; l < r->weights.size(); ++l) {
        direct += r->weights(l) * std::pow(r->points.col(l).dot(u), 3);
    }
    EXPECT_NEAR(direct, affine.n() * affine.third_contract(y, u), 1e-10 * (1 + std::abs(direct)));

    ScaledModel scaled(base, 2.5);
    EXPECT_DOUBLE_EQ(scaled.n(), base->n() / 2.5);
    EXPECT_NEAR(scaled.n() * scaled.value(y), base->n() * base->value(y), 1e-12);
    EXPECT_THROW(ScaledModel(base, -1.0), ArgumentError);
}
