#include "lapdiag/hermite.hpp"

#include "lapdiag/errors.hpp"
#include "lapdiag/parallel.hpp"
#include "lapdiag/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lapdiag {

double hermite3_apply(const SymTensor3& s, const Vector& x) {
    if (static_cast<Eigen::Index>(s.dim()) != x.size()) {
        throw ArgumentError("hermite3_apply: dimension mismatch");
    }
    return contract3(s, x) - 3.0 * trace_vector(s).dot(x);
}

double cubic_second_moment(const SymTensor3& s) {
    const double f = frobenius(s);
    return 6.0 * f * f + 9.0 * trace_vector(s).squaredNorm();
}

namespace {

// Running statistics of values stored as y * exp(shift).
struct ShiftedStats {
    RunningStats stats;
    double shift = 0.0;

    void merge(const ShiftedStats& other) {
        if (other.stats.count == 0) return;
        if (stats.count == 0) {
            *this = other;
            return;
        }
        const double common = std::max(shift, other.shift);
        RunningStats a = rescaled(stats, std::exp(shift - common));
        a.merge(rescaled(other.stats, std::exp(other.shift - common)));
        stats = a;
        shift = common;
    }

    static RunningStats rescaled(RunningStats s, double factor) {
        s.mean *= factor;
        s.m2 *= factor * factor;
        return s;
    }
};

template <class Values>
MomentEstimate power_moment(Eigen::Index d, int k, std::size_t samples, std::uint64_t seed,
                            unsigned workers, Values&& values) {
    if (k < 1) throw ArgumentError("moment order k must be >= 1");
    if (samples < 100) throw ArgumentError("Monte Carlo needs at least 100 samples");
    const int power = 2 * k;
    const bool log_domain = power >= 8;
    const std::size_t blocks = block_count(samples);
    std::vector<ShiftedStats> parts(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t begin = b * kMonteCarloBlock;
        const auto len = static_cast<Eigen::Index>(std::min(kMonteCarloBlock, samples - begin));
        Rng rng = make_stream(seed, b);
        Matrix z(d, len);
        fill_standard_normal(rng, z);
        const Vector c = values(z);
        ShiftedStats& out = parts[b];
        if (!log_domain) {
            for (Eigen::Index i = 0; i < len; ++i) out.stats.add(std::pow(c(i), power));
            return;
        }
        Vector logs(len);
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < len; ++i) {
            logs(i) = power * std::log(std::abs(c(i)));
            top = std::max(top, logs(i));
        }
        if (!std::isfinite(top)) {
            // every value is zero
            for (Eigen::Index i = 0; i < len; ++i) out.stats.add(0.0);
            return;
        }
        out.shift = top;
        for (Eigen::Index i = 0; i < len; ++i) out.stats.add(std::exp(logs(i) - top));
    });
    ShiftedStats total = tree_reduce(std::move(parts), [](ShiftedStats& a, const ShiftedStats& b) {
        a.merge(b);
    });
    const double scale = std::exp(total.shift);
    MomentEstimate est;
    est.samples = total.stats.count;
    est.estimate = total.stats.mean * scale;
    est.standard_error = total.stats.standard_error() * scale;
    return est;
}

}  // namespace

MomentEstimate mc_cubic_moment(const SymTensor3& s, int k, std::size_t samples,
                               std::uint64_t seed, unsigned workers) {
    return power_moment(static_cast<Eigen::Index>(s.dim()), k, samples, seed, workers,
                        [&](const Matrix& z) { return contract3_columns(s, z); });
}

MomentEstimate mc_hermite3_moment(const SymTensor3& s, int k, std::size_t samples,
                                  std::uint64_t seed, unsigned workers) {
    const Vector trace = 3.0 * trace_vector(s);
    return power_moment(static_cast<Eigen::Index>(s.dim()), k, samples, seed, workers,
                        [&](const Matrix& z) -> Vector {
                            return contract3_columns(s, z) - z.transpose() * trace;
                        });
}

}  // namespace lapdiag
