#pragma once

#include "lapdiag/laplace_fit.hpp"
#include "lapdiag/models.hpp"
#include "lapdiag/tensor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lapdiag {

/// Which representation of grad^3 W(0) to use.
enum class ThirdPath {
    automatic,  // dense when d <= 64 and d^2 <= number of rank-one terms, else rank-one
    rank_one,
    dense,
};

/// grad^3 W(0) = n grad^3 v(mode)[L^{-T}., L^{-T}., L^{-T}.] in one of three
/// forms: a dense tensor, whitened rank-one terms sum_l a_l B_l^3 with
/// B_l = L^{-1} X_l, or (fallback) the model's directional contraction.
/// The fallback keeps pointers to `fit` and `model`, which must outlive it.
class WhitenedThird {
public:
    WhitenedThird(const LaplaceFit& fit, const Model& model, ThirdPath path = ThirdPath::automatic);

    std::size_t dim() const { return dim_; }
    bool has_dense() const { return dense_.has_value(); }
    bool has_rank_one() const { return rank_one_.has_value(); }
    const SymTensor3& dense() const;
    const RankOneStructure& rank_one() const;
    /// "dense", "rank_one" or "contraction": the form used for evaluation.
    std::string evaluation_path() const;

    double contract(const Vector& z) const;
    /// <grad^3 W(0), z_b^3> for every column of z.
    Vector contract_columns(const Matrix& z) const;
    HomogeneousForm form() const;

private:
    std::size_t dim_;
    const LaplaceFit* fit_;
    const Model* model_;
    std::optional<SymTensor3> dense_;
    std::optional<RankOneStructure> rank_one_;
};

struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// L = (1/12) E |<grad^3 W(0), Z^3>| by Monte Carlo with blocked,
/// worker-count independent streams.
McEstimate estimate_L(const LaplaceFit& fit, const Model& model, std::size_t samples,
                      std::uint64_t seed, unsigned workers = 1);
McEstimate estimate_L(const WhitenedThird& third, std::size_t samples, std::uint64_t seed,
                      unsigned workers = 1);

/// c~3 from c~3^2 d^2 / n = |S|_F^2 / 3 + |<S, I>|^2 / 2 with S = grad^3 W(0).
/// Throws CapabilityError when neither rank-one nor dense structure exists.
double tilde_c3(const LaplaceFit& fit, const Model& model, ThirdPath path = ThirdPath::automatic);
double tilde_c3(const WhitenedThird& third, double n);

struct NormEstimate {
    double value = 0.0;
    bool converged = true;
};

/// Estimated c3 = |grad^3 v(mode)|_{H_v} = sqrt(n) |grad^3 W(0)|.
/// Lower-bound semantics.
NormEstimate estimate_c3(const LaplaceFit& fit, const Model& model, int restarts,
                         std::uint64_t seed);
NormEstimate estimate_c3(const WhitenedThird& third, double n, int restarts, std::uint64_t seed);

/// Probe points for c4(R): the mode plus `probes` points mode + R sqrt(d) L^{-T} w
/// with w uniform in the unit ball, i.e. uniform in |x - mode|_{H_v} <= R sqrt(d/n).
std::vector<Vector> c4_probe_points(const LaplaceFit& fit, double radius, int probes,
                                    std::uint64_t seed);

/// Estimated c4(R) = max over probe points of |grad^4 v(x)|_{H_v}.
/// Lower-bound semantics. Requires radius > 0.
NormEstimate estimate_c4(const LaplaceFit& fit, const Model& model, double radius, int probes,
                         int restarts, std::uint64_t seed);

struct A2Check {
    std::optional<double> c0;
    std::string reason;  // empty when c0 is present
};

/// Left half of the growth assumption for convex v: c0 = R0 / 4 when
/// c3 d / sqrt(n) <= 1 and c4 d^2 / n <= 1 (both inclusive).
A2Check check_a2_left(double c3, double c4, double r0, double d, double n);

/// E |grad r3(Z)|^2 = E |grad W(Z) - Z|^2 by Monte Carlo.
McEstimate lsi_bound_estimate(const LaplaceFit& fit, const Model& model, std::size_t samples,
                              std::uint64_t seed, unsigned workers = 1);

struct DiagnosticsOptions {
    std::size_t mc_samples = 100000;
    int restarts = 32;
    double radius = 4.0;
    int c4_probes = 16;
    /// 0 selects min(mc_samples, 10000).
    std::size_t lsi_samples = 0;
    double r0 = 1.0;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    ThirdPath path = ThirdPath::automatic;
};

struct DiagnosticsReport {
    std::size_t d = 0;
    double n = 0.0;
    double L_hat = 0.0;
    double L_stderr = 0.0;
    std::size_t K_samples = 0;
    double tilde_c3 = 0.0;
    double c3_hat = 0.0;
    double c4_hat = 0.0;
    double R_used = 0.0;
    double leading_bound = 0.0;
    double tilde_leading_bound = 0.0;
    double remainder_bound = 0.0;
    std::array<double, 2> tv_interval{};
    double lsi_bound_hat = 0.0;
    double lambda_min_Hv = 0.0;
    std::optional<double> a2_left_c0;
    std::uint64_t seed = 0;
    std::vector<std::string> flags;
    double exp_neg_d_over_2 = 0.0;
    double exp_neg_d_over_4 = 0.0;
    double overall_bound = 0.0;
};

DiagnosticsReport assemble_report(const LaplaceFit& fit, const Model& model,
                                  const DiagnosticsOptions& options = {});

std::string report_to_json(const DiagnosticsReport& report);

}  // namespace lapdiag
