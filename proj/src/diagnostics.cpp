#include "lapdiag/diagnostics.hpp"

#include "lapdiag/errors.hpp"
#include "lapdiag/json.hpp"
#include "lapdiag/parallel.hpp"
#include "lapdiag/random.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace lapdiag {

// ---------------------------------------------------------------------------
// Whitened third derivative

WhitenedThird::WhitenedThird(const LaplaceFit& fit, const Model& model, ThirdPath path)
    : dim_(fit.d), fit_(&fit), model_(&model) {
    if (model.dim() != fit.d) throw ArgumentError("fit and model dimensions differ");
    std::optional<RankOneStructure> r;
    if (path != ThirdPath::dense || fit.d <= kMaxDenseDim) r = model.rank_one_third(fit.mode);
    if (r) {
        // B_l = L^{-1} X_l
        r->points = fit.chol.triangularView<Eigen::Lower>().solve(r->points);
    }
    const auto terms = r ? static_cast<std::size_t>(r->points.cols()) : 0;
    switch (path) {
        case ThirdPath::rank_one:
            if (!r) throw CapabilityError(model.name() + " model has no rank-one third derivative");
            rank_one_ = std::move(r);
            return;
        case ThirdPath::dense:
            if (fit.d > kMaxDenseDim) {
                throw CapabilityError("dense third derivative needs d <= 64");
            }
            if (r) {
                dense_ = SymTensor3::sum_of_cubes(r->points, r->weights);
                return;
            }
            if (auto t = model.third_tensor(fit.mode)) {
                dense_ = t->transformed(fit.whitening).scaled(fit.n);
                return;
            }
            throw CapabilityError(model.name() + " model has no dense third derivative");
        case ThirdPath::automatic:
            if (r) {
                if (fit.d <= kMaxDenseDim && fit.d * fit.d <= terms) {
                    dense_ = SymTensor3::sum_of_cubes(r->points, r->weights);
                } else {
                    rank_one_ = std::move(r);
                }
                return;
            }
            if (fit.d <= kMaxDenseDim) {
                if (auto t = model.third_tensor(fit.mode)) {
                    dense_ = t->transformed(fit.whitening).scaled(fit.n);
                }
            }
            return;
    }
}

const SymTensor3& WhitenedThird::dense() const {
    if (!dense_) throw CapabilityError("no dense whitened third derivative");
    return *dense_;
}

const RankOneStructure& WhitenedThird::rank_one() const {
    if (!rank_one_) throw CapabilityError("no whitened rank-one structure");
    return *rank_one_;
}

std::string WhitenedThird::evaluation_path() const {
    if (dense_) return "dense";
    if (rank_one_) return "rank_one";
    return "contraction";
}

double WhitenedThird::contract(const Vector& z) const {
    if (z.size() != static_cast<Eigen::Index>(dim_)) {
        throw ArgumentError("whitened contraction: dimension mismatch");
    }
    if (dense_) return contract3(*dense_, z);
    if (rank_one_) {
        const Vector p = rank_one_->points.transpose() * z;
        return (rank_one_->weights.array() * p.array().cube()).sum();
    }
    return whitened_third(*fit_, *model_, z);
}

Vector WhitenedThird::contract_columns(const Matrix& z) const {
    if (z.rows() != static_cast<Eigen::Index>(dim_)) {
        throw ArgumentError("whitened contraction: dimension mismatch");
    }
    if (dense_) {
        // Chunked so the d^2 x chunk intermediate stays small.
        constexpr Eigen::Index kChunk = 256;
        Vector out(z.cols());
        for (Eigen::Index s = 0; s < z.cols(); s += kChunk) {
            const Eigen::Index len = std::min(kChunk, z.cols() - s);
            out.segment(s, len) = contract3_columns(*dense_, z.middleCols(s, len));
        }
        return out;
    }
    if (rank_one_) {
        const Matrix p = rank_one_->points.transpose() * z;  // m x cols
        return (p.array().cube().colwise() * rank_one_->weights.array()).colwise().sum().transpose();
    }
    Vector out(z.cols());
    for (Eigen::Index b = 0; b < z.cols(); ++b) out(b) = whitened_third(*fit_, *model_, z.col(b));
    return out;
}

HomogeneousForm WhitenedThird::form() const {
    if (dense_) return make_form(*dense_);
    HomogeneousForm f;
    f.dim = dim_;
    f.order = 3;
    if (rank_one_) {
        auto r = std::make_shared<const RankOneStructure>(*rank_one_);
        f.value = [r](const Vector& u) {
            const Vector p = r->points.transpose() * u;
            return (r->weights.array() * p.array().cube()).sum();
        };
        f.gradient = [r](const Vector& u) -> Vector {
            const Vector p = r->points.transpose() * u;
            const Vector w = 3.0 * (r->weights.array() * p.array().square()).matrix();
            return r->points * w;
        };
        return f;
    }
    const LaplaceFit* fit = fit_;
    const Model* model = model_;
    f.value = [fit, model](const Vector& u) { return whitened_third(*fit, *model, u); };
    f.gradient = [fit, model](const Vector& u) -> Vector {
        const Vector x = fit->whitening * u;
        return 3.0 * fit->n * (fit->whitening.transpose() * model->third_contract_vector(fit->mode, x));
    };
    return f;
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators

namespace {

template <class BlockFn>
RunningStats blocked_mc(std::size_t samples, std::uint64_t seed, unsigned workers, BlockFn&& fn) {
    const std::size_t blocks = block_count(samples);
    std::vector<RunningStats> parts(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t begin = b * kMonteCarloBlock;
        const std::size_t len = std::min(kMonteCarloBlock, samples - begin);
        Rng rng = make_stream(seed, b);
        parts[b] = fn(rng, static_cast<Eigen::Index>(len));
    });
    return reduce_stats(std::move(parts));
}

}  // namespace

McEstimate estimate_L(const WhitenedThird& third, std::size_t samples, std::uint64_t seed,
                      unsigned workers) {
    if (samples < 1000) throw ArgumentError("estimate_L needs at least 1000 samples");
    const auto d = static_cast<Eigen::Index>(third.dim());
    const RunningStats stats = blocked_mc(samples, seed, workers, [&](Rng& rng, Eigen::Index len) {
        Matrix z(d, len);
        fill_standard_normal(rng, z);
        const Vector c = third.contract_columns(z);
        RunningStats s;
        for (Eigen::Index i = 0; i < len; ++i) s.add(std::abs(c(i)) / 12.0);
        return s;
    });
    return {stats.mean, stats.standard_error(), stats.count};
}

McEstimate estimate_L(const LaplaceFit& fit, const Model& model, std::size_t samples,
                      std::uint64_t seed, unsigned workers) {
    return estimate_L(WhitenedThird(fit, model), samples, seed, workers);
}

double tilde_c3(const WhitenedThird& third, double n) {
    const double d = static_cast<double>(third.dim());
    double q = 0.0;  // c~3^2 d^2 / n
    if (third.has_dense()) {
        const double f = frobenius(third.dense());
        q = f * f / 3.0 + 0.5 * trace_vector(third.dense()).squaredNorm();
    } else if (third.has_rank_one()) {
        // Sum over pairs of a_l a_m [(B_l.B_m)^3 / 3 + |B_l|^2 |B_m|^2 (B_l.B_m) / 2],
        // accumulated over row blocks of the Gram matrix.
        const Matrix& b = third.rank_one().points;
        const Vector& a = third.rank_one().weights;
        const Vector norms = b.colwise().squaredNorm().transpose();
        const Vector an = a.cwiseProduct(norms);
        constexpr Eigen::Index kBlock = 256;
        for (Eigen::Index s = 0; s < b.cols(); s += kBlock) {
            const Eigen::Index len = std::min(kBlock, b.cols() - s);
            const Matrix g = b.middleCols(s, len).transpose() * b;  // len x m
            const Vector cubes = g.array().cube().matrix() * a;
            const Vector lin = g * an;
            q += a.segment(s, len).dot(cubes) / 3.0 + 0.5 * an.segment(s, len).dot(lin);
        }
    } else {
        throw CapabilityError("c~3 needs a rank-one or dense third derivative");
    }
    return std::sqrt(std::max(q, 0.0) * n) / d;
}

double tilde_c3(const LaplaceFit& fit, const Model& model, ThirdPath path) {
    const WhitenedThird third(fit, model, path);
    return tilde_c3(third, fit.n);
}

NormEstimate estimate_c3(const WhitenedThird& third, double n, int restarts, std::uint64_t seed) {
    OpnormOptions opts;
    opts.restarts = restarts;
    opts.seed = seed;
    const OpnormEstimate est = opnorm_sphere(third.form(), opts);
    return {std::sqrt(n) * est.value, est.converged};
}

NormEstimate estimate_c3(const LaplaceFit& fit, const Model& model, int restarts,
                         std::uint64_t seed) {
    return estimate_c3(WhitenedThird(fit, model), fit.n, restarts, seed);
}

std::vector<Vector> c4_probe_points(const LaplaceFit& fit, double radius, int probes,
                                    std::uint64_t seed) {
    if (!(radius > 0.0)) throw ArgumentError("c4 radius must be positive");
    if (probes < 0) throw ArgumentError("c4 probe count must be >= 0");
    const auto d = static_cast<Eigen::Index>(fit.d);
    const double scale = radius * std::sqrt(static_cast<double>(fit.d));
    std::vector<Vector> points{fit.mode};
    for (int i = 0; i < probes; ++i) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
        points.push_back(fit.mode + scale * (fit.whitening * random_in_unit_ball(rng, d)));
    }
    return points;
}

NormEstimate estimate_c4(const LaplaceFit& fit, const Model& model, double radius, int probes,
                         int restarts, std::uint64_t seed) {
    const std::vector<Vector> points = c4_probe_points(fit, radius, probes, seed);
    // |T|_{H_v} = n^2 sup_{|w| = 1} |<T, (L^{-T} w)^4>| since H_v = L L^T / n.
    const double n2 = fit.n * fit.n;
    NormEstimate best{0.0, true};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vector x = points[i];
        OpnormOptions opts;
        opts.restarts = restarts;
        opts.seed = stream_seed(seed, 1000003 + i);
        OpnormEstimate est;
        if (auto t = model.fourth_tensor(x)) {
            est = opnorm_sphere(t->transformed(fit.whitening), opts);
        } else {
            HomogeneousForm f;
            f.dim = fit.d;
            f.order = 4;
            const Matrix& m = fit.whitening;
            f.value = [&model, &m, x](const Vector& w) { return model.fourth_contract(x, m * w); };
            f.gradient = [&model, &m, x](const Vector& w) -> Vector {
                return 4.0 * (m.transpose() * model.fourth_contract_vector(x, m * w));
            };
            est = opnorm_sphere(f, opts);
        }
        const double value = n2 * est.value;
        if (value > best.value) best.value = value;
        best.converged = best.converged && est.converged;
    }
    return best;
}

A2Check check_a2_left(double c3, double c4, double r0, double d, double n) {
    if (!(r0 > 0.0) || !(d > 0.0) || !(n > 0.0)) {
        throw ArgumentError("check_a2_left needs positive R0, d and n");
    }
    A2Check out;
    const bool c3_ok = c3 * d / std::sqrt(n) <= 1.0;
    const bool c4_ok = c4 * d * d / n <= 1.0;
    if (c3_ok && c4_ok) {
        out.c0 = r0 / 4.0;
    } else if (!c3_ok && !c4_ok) {
        out.reason = "c3 condition and c4 condition";
    } else {
        out.reason = c3_ok ? "c4 condition" : "c3 condition";
    }
    return out;
}

McEstimate lsi_bound_estimate(const LaplaceFit& fit, const Model& model, std::size_t samples,
                              std::uint64_t seed, unsigned workers) {
    if (samples < 100) throw ArgumentError("LSI estimate needs at least 100 samples");
    const auto d = static_cast<Eigen::Index>(fit.d);
    const RunningStats stats = blocked_mc(samples, seed, workers, [&](Rng& rng, Eigen::Index len) {
        Matrix z(d, len);
        fill_standard_normal(rng, z);
        RunningStats s;
        for (Eigen::Index i = 0; i < len; ++i) {
            const Vector zi = z.col(i);
            s.add((whitened_gradient(fit, model, zi) - zi).squaredNorm());
        }
        return s;
    });
    return {stats.mean, stats.standard_error(), stats.count};
}

// ---------------------------------------------------------------------------
// Report

DiagnosticsReport assemble_report(const LaplaceFit& fit, const Model& model,
                                  const DiagnosticsOptions& options) {
    if (!(options.radius > 0.0)) throw ArgumentError("radius must be positive");
    if (options.restarts < 1) throw ArgumentError("restarts must be >= 1");
    DiagnosticsReport r;
    r.d = fit.d;
    r.n = fit.n;
    r.seed = options.seed;
    r.R_used = options.radius;
    r.lambda_min_Hv = fit.lambda_min_Hv;
    const double d = static_cast<double>(fit.d);
    const double root_n = std::sqrt(fit.n);

    const WhitenedThird third(fit, model, options.path);
    const McEstimate L = estimate_L(third, options.mc_samples, options.seed, options.workers);
    r.L_hat = L.value;
    r.L_stderr = L.standard_error;
    r.K_samples = L.samples;
    r.tilde_c3 = tilde_c3(third, fit.n);
    const NormEstimate c3 =
        estimate_c3(third, fit.n, options.restarts, stream_seed(options.seed, 1));
    r.c3_hat = c3.value;
    const NormEstimate c4 = estimate_c4(fit, model, options.radius, options.c4_probes,
                                        options.restarts, stream_seed(options.seed, 2));
    r.c4_hat = c4.value;
    const std::size_t lsi_samples =
        options.lsi_samples ? options.lsi_samples : std::min<std::size_t>(options.mc_samples, 10000);
    r.lsi_bound_hat =
        lsi_bound_estimate(fit, model, lsi_samples, stream_seed(options.seed, 3), options.workers)
            .value;

    r.leading_bound = r.c3_hat * d / root_n;
    r.tilde_leading_bound = r.tilde_c3 * d / std::sqrt(8.0 * fit.n);
    r.exp_neg_d_over_2 = std::exp(-d / 2.0);
    r.exp_neg_d_over_4 = std::exp(-d / 4.0);
    const double c3_term = r.c3_hat * d / root_n;
    const double c4_term = r.c4_hat * d * d / fit.n;
    r.remainder_bound = c3_term * c3_term + c4_term + r.exp_neg_d_over_2;
    r.overall_bound = c3_term + c4_term + r.exp_neg_d_over_4;
    r.tv_interval = {std::max(0.0, r.L_hat - r.remainder_bound), r.L_hat + r.remainder_bound};

    r.flags.push_back("absolute constant C set to 1 in remainder_bound, tv_interval and overall_bound");
    r.flags.push_back("L uses the 1/12 prefactor");
    r.flags.push_back("c3_hat and c4_hat are estimated lower bounds (multistart ascent)");
    r.flags.push_back("third derivative evaluated via " + third.evaluation_path() + " path");
    if (!fit.converged) r.flags.push_back("warning: mode search stopped before the gradient tolerance");
    if (!c3.converged) r.flags.push_back("warning: c3 ascent hit the iteration limit");
    if (!c4.converged) r.flags.push_back("warning: c4 ascent hit the iteration limit");

    // A2 via the convexity lemma with R0 and c4(R) >= c4(R0) as a surrogate.
    const A2Check a2 = check_a2_left(r.c3_hat, r.c4_hat, options.r0, d, fit.n);
    r.a2_left_c0 = a2.c0;
    r.flags.push_back("a2_left_c0 assumes convex v and uses c4_hat at R_used for c4(R0)");
    if (!a2.c0) {
        r.flags.push_back("a2_left_c0 absent: " + a2.reason + " violated");
        r.flags.push_back("R condition not evaluated (no c0)");
    } else {
        const double c0 = *a2.c0;
        const double R = options.radius;
        const bool big_enough = R >= std::max({options.r0, 4.0 * c0, 4.0});
        const double margin = R * c0 - 2.0 * std::log(R);
        r.flags.push_back(std::string("R >= max(R0, 4 c0, 4): ") + (big_enough ? "holds" : "fails"));
        r.flags.push_back(std::string("R c0 - 2 log R >= 10: ") + (margin >= 10.0 ? "holds" : "fails") +
                          " (value " + json::number(margin) + ")");
        r.flags.push_back(std::string("R c0 - 2 log R >= 6 + 2k with k = 1: ") +
                          (margin >= 8.0 ? "holds" : "fails"));
    }
    return r;
}

std::string report_to_json(const DiagnosticsReport& r) {
    json::Object o;
    o.integer("d", static_cast<long long>(r.d))
        .num("n", r.n)
        .num("L_hat", r.L_hat)
        .num("L_stderr", r.L_stderr)
        .integer("K_samples", static_cast<long long>(r.K_samples))
        .num("tilde_c3", r.tilde_c3)
        .num("c3_hat", r.c3_hat)
        .num("c4_hat", r.c4_hat)
        .num("R_used", r.R_used)
        .num("leading_bound", r.leading_bound)
        .num("tilde_leading_bound", r.tilde_leading_bound)
        .num("remainder_bound", r.remainder_bound)
        .raw("tv_interval", json::array(std::vector<double>{r.tv_interval[0], r.tv_interval[1]}))
        .num("lsi_bound_hat", r.lsi_bound_hat)
        .num("lambda_min_Hv", r.lambda_min_Hv)
        .raw("a2_left_c0", r.a2_left_c0 ? json::number(*r.a2_left_c0) : "null")
        .raw("seed", std::to_string(r.seed))
        .raw("flags", json::array(r.flags))
        .num("exp_neg_d_over_2", r.exp_neg_d_over_2)
        .num("exp_neg_d_over_4", r.exp_neg_d_over_4)
        .num("overall_bound", r.overall_bound);
    return o.dump();
}

}  // namespace lapdiag
