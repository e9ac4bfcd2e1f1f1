#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lapdiag {

/// Sample-size schedules for the L vs d experiment.
enum class Regime { quadratic, power_2_5 };

/// "d2" or "d2.5".
std::string regime_name(Regime r);
/// "n=2d^2" or "n=d^2.5".
std::string regime_label(Regime r);
Regime parse_regime(const std::string& name);
/// round(2 d^2) or round(d^2.5).
std::size_t regime_n(std::size_t d, Regime r);

struct ExperimentOptions {
    std::vector<std::size_t> dims{4, 8, 16, 32, 64};
    std::vector<Regime> regimes{Regime::quadratic, Regime::power_2_5};
    std::size_t replicates = 20;
    std::uint64_t base_seed = 0;
    std::size_t mc_samples = 100000;
    unsigned workers = 1;
    /// Record wall-clock milliseconds per row; 0 otherwise so files are reproducible.
    bool timing = false;
};

struct ExperimentRow {
    std::size_t d = 0;
    std::size_t n = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    double L_hat = 0.0;
    double L_stderr = 0.0;
    double tilde_c3 = 0.0;
    double lambda_min_Hv = 0.0;
    double wall_ms = 0.0;
    /// The MLE did not exist or the Hessian was degenerate; numeric fields are NaN.
    bool diverged = false;
};

/// Dataset seed: base_seed + a 64-bit mix of (d, replicate). Shared by both
/// regimes, so a (d, n) pair reached by both yields the same posterior.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t d, std::size_t replicate);

/// Logistic posteriors with beta = e_1. One row per distinct (d, n, replicate),
/// sorted by (d, n, replicate).
std::vector<ExperimentRow> run_experiment(const ExperimentOptions& options);

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
/// Throws ArgumentError naming the 1-based line on malformed input.
std::vector<ExperimentRow> read_experiment_csv(std::istream& in);

struct RegimePoint {
    std::size_t d = 0;
    std::size_t n = 0;
    std::size_t used = 0;
    std::size_t diverged = 0;
    double mean = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
};

struct RegimeSummary {
    Regime regime = Regime::quadratic;
    std::vector<RegimePoint> points;
    /// Least-squares slope of log10(mean L) against log10(d); absent with < 2 points.
    std::optional<double> slope;
    /// max over d of mean L divided by the min.
    double max_min_ratio = 0.0;
};

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double p);

/// Rows belong to a regime when n matches its schedule; diverged rows are counted
/// and excluded. Regimes with no rows are omitted.
std::vector<RegimeSummary> summarize(const std::vector<ExperimentRow>& rows,
                                     const std::vector<Regime>& regimes);
std::string summary_to_json(const std::vector<RegimeSummary>& summaries);
void print_summary(std::ostream& out, const std::vector<RegimeSummary>& summaries);

/// Log-log plot of mean L against d with shaded 10%-90% bands: one <path> and
/// one <polygon> per regime.
std::string render_svg(const std::vector<RegimeSummary>& summaries);

}  // namespace lapdiag
