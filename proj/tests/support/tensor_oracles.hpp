#pragma once

// Slow reference implementations used only by tests.

#include "lapdiag/random.hpp"
#include "lapdiag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lapdiag::testing {

inline SymTensor3 random_sym3(Rng& rng, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    SymTensor3 s(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            for (std::size_t k = j; k < d; ++k) s.set(i, j, k, normal(rng));
    return s;
}

inline SymTensor4 random_sym4(Rng& rng, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    SymTensor4 t(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            for (std::size_t k = j; k < d; ++k)
                for (std::size_t l = k; l < d; ++l) t.set(i, j, k, l, normal(rng));
    return t;
}

inline Matrix random_symmetric(Rng& rng, Eigen::Index d) {
    Matrix a(d, d);
    fill_standard_normal(rng, a);
    return 0.5 * (a + a.transpose());
}

inline Matrix random_spd(Rng& rng, Eigen::Index d) {
    Matrix a(d, d);
    fill_standard_normal(rng, a);
    return a * a.transpose() + 0.5 * Matrix::Identity(d, d);
}

inline double naive_contract3(const SymTensor3& s, const Vector& u) {
    double sum = 0.0;
    const std::size_t d = s.dim();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) sum += s(i, j, k) * u(i) * u(j) * u(k);
    return sum;
}

inline double naive_contract4(const SymTensor4& t, const Vector& u) {
    double sum = 0.0;
    const std::size_t d = t.dim();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l)
                    sum += t(i, j, k, l) * u(i) * u(j) * u(k) * u(l);
    return sum;
}

inline Vector naive_contract_matrix(const SymTensor3& s, const Matrix& a) {
    const std::size_t d = s.dim();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) out(i) += s(i, j, k) * a(j, k);
    return out;
}

inline SymTensor3 naive_transform(const SymTensor3& s, const Matrix& m) {
    const std::size_t d = s.dim();
    std::vector<double> full(d * d * d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            for (std::size_t c = 0; c < d; ++c) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j)
                        for (std::size_t k = 0; k < d; ++k)
                            sum += s(i, j, k) * m(i, a) * m(j, b) * m(k, c);
                full[(a * d + b) * d + c] = sum;
            }
    return SymTensor3::from_full(d, full, 1e-10);
}

/// sup_{|u|=1} |f(u)| for d <= 3 by a dense grid followed by local zoom
/// refinement around the best grid points.
template <class F>
double grid_sphere_max(std::size_t d, F&& f, int grid = 1000) {
    auto eval = [&](const Vector& u) { return std::abs(f(u)); };
    if (d == 1) {
        Vector u(1);
        u(0) = 1.0;
        return eval(u);
    }
    struct Candidate {
        double value;
        double a;
        double b;
    };
    auto point = [&](double a, double b) {
        Vector u(static_cast<Eigen::Index>(d));
        if (d == 2) {
            u << std::cos(a), std::sin(a);
        } else {
            u << std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), std::cos(a);
        }
        return u;
    };
    std::vector<Candidate> best;
    const int na = d == 2 ? grid * grid : grid;
    const int nb = d == 2 ? 1 : grid;
    const double pi = std::acos(-1.0);
    const double da = (d == 2 ? 2.0 * pi : pi) / na;
    const double db = 2.0 * pi / nb;
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            const double a = (i + 0.5) * da;
            const double b = j * db;
            const double v = eval(point(a, b));
            best.push_back({v, a, b});
        }
    }
    std::partial_sort(best.begin(), best.begin() + 16, best.end(),
                      [](const Candidate& x, const Candidate& y) { return x.value > y.value; });
    best.resize(16);
    double top = best.front().value;
    for (Candidate c : best) {
        double ha = da, hb = db;
        for (int round = 0; round < 60; ++round) {
            Candidate local = c;
            for (int ia = -2; ia <= 2; ++ia)
                for (int ib = (d == 2 ? 0 : -2); ib <= (d == 2 ? 0 : 2); ++ib) {
                    const double a = c.a + ia * ha * 0.5;
                    const double b = c.b + ib * hb * 0.5;
                    const double v = eval(point(a, b));
                    if (v > local.value) local = {v, a, b};
                }
            c = local;
            ha *= 0.6;
            hb *= 0.6;
        }
        top = std::max(top, c.value);
    }
    return top;
}

}  // namespace lapdiag::testing
