#include "lapdiag/cli.hpp"

#include "lapdiag/diagnostics.hpp"
#include "lapdiag/errors.hpp"
#include "lapdiag/experiment.hpp"
#include "lapdiag/json.hpp"
#include "lapdiag/laplace_fit.hpp"
#include "lapdiag/models.hpp"
#include "lapdiag/oracle.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace lapdiag {

namespace {

struct Flags {
    // shared
    std::uint64_t seed = 0;
    std::string out;
    std::string data;
    unsigned workers = 1;
    // generate
    std::size_t d = 0;
    double n = 0;
    std::vector<double> beta;
    // diagnose
    std::string model = "logistic";
    std::size_t mc_samples = 100000;
    int restarts = 32;
    double radius = 4.0;
    int c4_probes = 16;
    std::size_t lsi_samples = 0;
    double r0 = 1.0;
    std::string path = "auto";
    // oracle
    std::string kind;
    double lambda = 0, c = 0, a = 0, b = 0, p = 0;
    // experiment
    std::vector<std::size_t> dims{4, 8, 16, 32, 64};
    std::string regime = "both";
    std::size_t replicates = 20;
    bool timing = false;
    std::string summary;
    // plot
    std::string in;
};

void write_file(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArgumentError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw ArgumentError("failed writing '" + path + "'");
}

std::ifstream open_input(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ArgumentError("cannot open '" + path + "'");
    return f;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f = open_input(path);
    return read_dataset_csv(f);
}

Vector beta_vector(const Flags& fl) {
    if (fl.beta.empty()) return Vector::Unit(static_cast<Eigen::Index>(fl.d), 0);
    if (fl.beta.size() != fl.d) throw ArgumentError("--beta needs exactly d entries");
    return Eigen::Map<const Vector>(fl.beta.data(), static_cast<Eigen::Index>(fl.beta.size()));
}

// A model from --data (logistic) or --model population --d --n, with a start point.
struct LoadedModel {
    std::unique_ptr<Model> model;
    Vector start;
};

LoadedModel load_model(const Flags& fl) {
    LoadedModel m;
    if (fl.model == "logistic") {
        if (fl.data.empty()) throw ArgumentError("--data is required for the logistic model");
        m.model = std::make_unique<LogisticModel>(load_dataset(fl.data));
    } else if (fl.model == "population") {
        if (fl.d < 1 || !(fl.n >= 1.0)) throw ArgumentError("population model needs --d >= 1 and --n >= 1");
        auto pop = std::make_unique<PopulationLogisticModel>(beta_vector(fl), fl.n);
        m.start = pop->beta();
        m.model = std::move(pop);
    } else {
        throw ArgumentError("unknown model '" + fl.model + "' (expected logistic or population)");
    }
    return m;
}

ThirdPath parse_path(const std::string& s) {
    if (s == "auto") return ThirdPath::automatic;
    if (s == "dense") return ThirdPath::dense;
    if (s == "rank-one") return ThirdPath::rank_one;
    throw ArgumentError("unknown --path '" + s + "' (expected auto, dense or rank-one)");
}

int cmd_generate(const Flags& fl, std::ostream& out) {
    if (fl.d < 1 || !(fl.n >= 1.0)) throw ArgumentError("generate needs --d >= 1 and --n >= 1");
    const Dataset data = generate_dataset(fl.d, static_cast<std::size_t>(fl.n), beta_vector(fl), fl.seed);
    std::ostringstream s;
    write_dataset_csv(s, data);
    write_file(fl.out, s.str(), out);
    return 0;
}

int cmd_fit(const Flags& fl, std::ostream& out) {
    const LoadedModel m = load_model(fl);
    const LaplaceFit f = fit(*m.model, m.start);
    write_file(fl.out, fit_to_json(f), out);
    return 0;
}

int cmd_diagnose(const Flags& fl, std::ostream& out) {
    const LoadedModel m = load_model(fl);
    const LaplaceFit f = fit(*m.model, m.start);
    DiagnosticsOptions o;
    o.mc_samples = fl.mc_samples;
    o.restarts = fl.restarts;
    o.radius = fl.radius;
    o.c4_probes = fl.c4_probes;
    o.lsi_samples = fl.lsi_samples;
    o.r0 = fl.r0;
    o.seed = fl.seed;
    o.workers = fl.workers;
    o.path = parse_path(fl.path);
    write_file(fl.out, report_to_json(assemble_report(f, *m.model, o)), out);
    return 0;
}

int cmd_oracle(const Flags& fl, std::ostream& out) {
    json::Object o;
    o.str("kind", fl.kind);
    if (fl.kind == "tv") {
        const LoadedModel m = load_model(fl);
        const LaplaceFit f = fit(*m.model, m.start);
        const TvResult tv = tv_bruteforce(*m.model, f);
        const double L = leading_term_quadrature(*m.model, f);
        o.str("model", fl.model)
            .integer("d", static_cast<long long>(f.d))
            .num("n", f.n)
            .num("tv", tv.tv)
            .num("L", L)
            .num("ratio", L > 0.0 ? tv.tv / L : std::nan(""))
            .num("estimated_error", tv.estimated_error)
            .num("normalizing_constant", tv.normalizing_constant)
            .integer("quadrature_nodes", static_cast<long long>(tv.quadrature_nodes));
    } else if (fl.kind == "lower-bound" || fl.kind == "population-L") {
        const GaussianMoments mom = gaussian_sigmoid_moments();
        o.integer("d", static_cast<long long>(fl.d)).num("n", fl.n);
        o.num("population_L_lower_bound", lemma31_lower_bound(mom, fl.d, fl.n));
        o.num("population_L_exact", population_L_exact(mom, fl.d, fl.n));
    } else if (fl.kind == "gamma-tail") {
        const TailCheck t = gamma_tail_check(fl.lambda, fl.c);
        o.num("lambda", fl.lambda).num("c", fl.c).num("exact", t.exact).num("bound", t.bound);
        o.raw("holds", t.exact <= t.bound ? "true" : "false");
    } else if (fl.kind == "polar-tail") {
        const TailCheck t = polar_tail_check(fl.a, fl.b, fl.p, fl.d);
        o.num("a", fl.a).num("b", fl.b).num("p", fl.p).integer("d", static_cast<long long>(fl.d));
        o.num("numeric_integral", t.exact).num("bound", t.bound);
        o.raw("holds", t.exact <= t.bound ? "true" : "false");
    } else {
        throw ArgumentError("unknown oracle '" + fl.kind + "'");
    }
    write_file(fl.out, o.dump(), out);
    return 0;
}

std::vector<Regime> parse_regimes(const std::string& s) {
    if (s == "both") return {Regime::quadratic, Regime::power_2_5};
    return {parse_regime(s)};
}

int cmd_experiment(const Flags& fl, std::ostream& out) {
    ExperimentOptions o;
    o.dims = fl.dims;
    o.regimes = parse_regimes(fl.regime);
    o.replicates = fl.replicates;
    o.base_seed = fl.seed;
    o.mc_samples = fl.mc_samples;
    o.workers = fl.workers;
    o.timing = fl.timing;
    const std::vector<ExperimentRow> rows = run_experiment(o);
    std::ostringstream csv;
    write_experiment_csv(csv, rows);
    const std::vector<RegimeSummary> summary = summarize(rows, o.regimes);
    if (fl.out.empty() || fl.out == "-") {
        out << csv.str();
    } else {
        write_file(fl.out, csv.str(), out);
        print_summary(out, summary);
    }
    if (!fl.summary.empty()) write_file(fl.summary, summary_to_json(summary), out);
    return 0;
}

int cmd_plot(const Flags& fl, std::ostream& out) {
    std::ifstream f = open_input(fl.in);
    const std::vector<ExperimentRow> rows = read_experiment_csv(f);
    const std::vector<RegimeSummary> summary = summarize(rows, {Regime::quadratic, Regime::power_2_5});
    if (summary.empty()) throw ArgumentError("no rows match the n=2d^2 or n=d^2.5 schedules");
    write_file(fl.out, render_svg(summary), out);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Flags fl;
    CLI::App app{"Laplace approximation accuracy diagnostics", "lapdiag"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto* gen = app.add_subcommand("generate", "simulate a logistic regression dataset");
    gen->add_option("--d", fl.d, "dimension")->required();
    gen->add_option("--n", fl.n, "sample size")->required();
    gen->add_option("--seed", fl.seed, "RNG seed")->capture_default_str();
    gen->add_option("--beta", fl.beta, "true coefficients (default e_1)")->delimiter(',');
    gen->add_option("--out", fl.out, "output CSV (default stdout)");

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--data", fl.data, "dataset CSV (logistic model)");
        sub->add_option("--model", fl.model, "logistic or population")->capture_default_str();
        sub->add_option("--d", fl.d, "dimension (population model)");
        sub->add_option("--n", fl.n, "sample size (population model)");
        sub->add_option("--beta", fl.beta, "population beta (default e_1)")->delimiter(',');
    };

    auto* fit_cmd = app.add_subcommand("fit", "locate the mode and Hessian");
    add_model(fit_cmd);
    fit_cmd->add_option("--out", fl.out, "output JSON (default stdout)");

    auto* diag = app.add_subcommand("diagnose", "compute the diagnostics report");
    add_model(diag);
    diag->add_option("--mc-samples", fl.mc_samples, "Monte Carlo samples K")->capture_default_str();
    diag->add_option("--seed", fl.seed, "RNG seed")->capture_default_str();
    diag->add_option("--restarts", fl.restarts, "multistart restarts")->capture_default_str();
    diag->add_option("--radius", fl.radius, "R for c4(R)")->capture_default_str();
    diag->add_option("--c4-probes", fl.c4_probes, "probe points for c4")->capture_default_str();
    diag->add_option("--lsi-samples", fl.lsi_samples, "samples for the LSI estimate (0: min(K, 10000))");
    diag->add_option("--r0", fl.r0, "R0 for the A2 check")->capture_default_str();
    diag->add_option("--path", fl.path, "auto, dense or rank-one")->capture_default_str();
    diag->add_option("--workers", fl.workers, "worker threads")->capture_default_str();
    diag->add_option("--out", fl.out, "output JSON (default stdout)");

    auto* orc = app.add_subcommand("oracle", "reference computations");
    orc->add_option("kind", fl.kind, "tv, lower-bound, population-L, gamma-tail or polar-tail")->required();
    add_model(orc);
    orc->add_option("--lambda", fl.lambda, "gamma tail threshold");
    orc->add_option("--c", fl.c, "gamma shape");
    orc->add_option("--a", fl.a, "polar radius factor");
    orc->add_option("--b", fl.b, "polar decay rate");
    orc->add_option("--p", fl.p, "polar power");
    orc->add_option("--out", fl.out, "output JSON (default stdout)");

    auto* exp = app.add_subcommand("experiment", "L against d for n = 2d^2 and n = d^2.5");
    exp->add_option("--dims", fl.dims, "ascending dimensions")->delimiter(',')->capture_default_str();
    exp->add_option("--regime", fl.regime, "d2, d2.5 or both")->capture_default_str();
    exp->add_option("--replicates", fl.replicates, "posteriors per (d, n)")->capture_default_str();
    exp->add_option("--seed", fl.seed, "base seed")->capture_default_str();
    exp->add_option("--mc-samples", fl.mc_samples, "Monte Carlo samples K")->capture_default_str();
    exp->add_option("--workers", fl.workers, "worker threads")->capture_default_str();
    exp->add_flag("--timing", fl.timing, "record wall_ms");
    exp->add_option("--out", fl.out, "output CSV (default stdout)");
    exp->add_option("--summary", fl.summary, "summary JSON");

    auto* plot = app.add_subcommand("plot", "render an experiment CSV as SVG");
    plot->add_option("--in", fl.in, "experiment CSV")->required();
    plot->add_option("--out", fl.out, "output SVG (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 1;
    }
    if (fl.workers < 1) {
        err << "error: --workers must be >= 1\n";
        return 1;
    }
    try {
        if (gen->parsed()) return cmd_generate(fl, out);
        if (fit_cmd->parsed()) return cmd_fit(fl, out);
        if (diag->parsed()) return cmd_diagnose(fl, out);
        if (orc->parsed()) return cmd_oracle(fl, out);
        if (exp->parsed()) return cmd_experiment(fl, out);
        if (plot->parsed()) return cmd_plot(fl, out);
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace lapdiag
