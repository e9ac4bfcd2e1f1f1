#include "lapdiag/experiment.hpp"

#include "lapdiag/diagnostics.hpp"
#include "lapdiag/errors.hpp"
#include "lapdiag/json.hpp"
#include "lapdiag/laplace_fit.hpp"
#include "lapdiag/models.hpp"
#include "lapdiag/parallel.hpp"
#include "lapdiag/random.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace lapdiag {

std::string regime_name(Regime r) { return r == Regime::quadratic ? "d2" : "d2.5"; }

std::string regime_label(Regime r) { return r == Regime::quadratic ? "n=2d^2" : "n=d^2.5"; }

Regime parse_regime(const std::string& name) {
    if (name == "d2") return Regime::quadratic;
    if (name == "d2.5") return Regime::power_2_5;
    throw ArgumentError("unknown regime '" + name + "' (expected d2 or d2.5)");
}

std::size_t regime_n(std::size_t d, Regime r) {
    const double x = static_cast<double>(d);
    return static_cast<std::size_t>(std::llround(r == Regime::quadratic ? 2.0 * x * x : std::pow(x, 2.5)));
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t d, std::size_t replicate) {
    return base_seed + mix64((static_cast<std::uint64_t>(d) << 32) ^ static_cast<std::uint64_t>(replicate));
}

namespace {

ExperimentRow run_one(std::size_t d, std::size_t n, std::size_t replicate, const ExperimentOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentRow row;
    row.d = d;
    row.n = n;
    row.replicate = replicate;
    row.seed = replicate_seed(o.base_seed, d, replicate);
    const Vector beta = Vector::Unit(static_cast<Eigen::Index>(d), 0);
    const LogisticModel model(generate_dataset(d, n, beta, row.seed));
    try {
        const LaplaceFit f = fit(model);
        const WhitenedThird third(f, model);
        const McEstimate L = estimate_L(third, o.mc_samples, stream_seed(row.seed, 1));
        row.L_hat = L.value;
        row.L_stderr = L.standard_error;
        row.tilde_c3 = tilde_c3(third, f.n);
        row.lambda_min_Hv = f.lambda_min_Hv;
    } catch (const NumericalError&) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.diverged = true;
        row.L_hat = row.L_stderr = row.tilde_c3 = row.lambda_min_Hv = nan;
    }
    if (o.timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return row;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentOptions& o) {
    if (o.dims.empty()) throw ArgumentError("experiment needs at least one dimension");
    if (o.replicates < 1) throw ArgumentError("replicates must be >= 1");
    if (o.regimes.empty()) throw ArgumentError("experiment needs at least one regime");
    for (std::size_t i = 0; i < o.dims.size(); ++i) {
        if (o.dims[i] < 2) throw ArgumentError("dimensions must be >= 2");
        if (i > 0 && o.dims[i] <= o.dims[i - 1]) throw ArgumentError("dimensions must be strictly ascending");
    }
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> jobs;
    for (Regime r : o.regimes)
        for (std::size_t d : o.dims)
            for (std::size_t k = 0; k < o.replicates; ++k) jobs.emplace(d, regime_n(d, r), k);
    const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> list(jobs.begin(), jobs.end());
    std::vector<ExperimentRow> rows(list.size());
    parallel_for(list.size(), o.workers, [&](std::size_t i) {
        const auto [d, n, k] = list[i];
        rows[i] = run_one(d, n, k, o);
    });
    return rows;
}

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
    out << "d,n,replicate,seed,L_hat,L_stderr,tilde_c3,lambda_min_Hv,wall_ms\n";
    char buf[64];
    auto num = [&](double x) -> std::string {
        if (std::isnan(x)) return "nan";
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return buf;
    };
    for (const ExperimentRow& r : rows) {
        out << r.d << ',' << r.n << ',' << r.replicate << ',' << r.seed << ',' << num(r.L_hat) << ','
            << num(r.L_stderr) << ',' << num(r.tilde_c3) << ',' << num(r.lambda_min_Hv) << ','
            << num(r.wall_ms) << '\n';
    }
}

namespace {

template <class T>
T parse_integer(const std::string& field, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ArgumentError("experiment CSV line " + std::to_string(line) + ": bad integer '" + field + "'");
    }
    return value;
}

double parse_real(const std::string& field, std::size_t line) {
    if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ArgumentError("experiment CSV line " + std::to_string(line) + ": bad number '" + field + "'");
    }
    return value;
}

}  // namespace

std::vector<ExperimentRow> read_experiment_csv(std::istream& in) {
    std::string line;
    std::size_t number = 1;
    if (!std::getline(in, line)) throw ArgumentError("experiment CSV line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "d,n,replicate,seed,L_hat,L_stderr,tilde_c3,lambda_min_Hv,wall_ms") {
        throw ArgumentError("experiment CSV line 1: unexpected header");
    }
    std::vector<ExperimentRow> rows;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 9) {
            throw ArgumentError("experiment CSV line " + std::to_string(number) + ": expected 9 fields, got " +
                                std::to_string(fields.size()));
        }
        ExperimentRow r;
        r.d = parse_integer<std::size_t>(fields[0], number);
        r.n = parse_integer<std::size_t>(fields[1], number);
        r.replicate = parse_integer<std::size_t>(fields[2], number);
        r.seed = parse_integer<std::uint64_t>(fields[3], number);
        r.L_hat = parse_real(fields[4], number);
        r.L_stderr = parse_real(fields[5], number);
        r.tilde_c3 = parse_real(fields[6], number);
        r.lambda_min_Hv = parse_real(fields[7], number);
        r.wall_ms = parse_real(fields[8], number);
        r.diverged = std::isnan(r.L_hat);
        if (!r.diverged && r.L_hat < 0.0) {
            throw ArgumentError("experiment CSV line " + std::to_string(number) + ": negative L_hat");
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw ArgumentError("experiment CSV has no data rows");
    return rows;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ArgumentError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<RegimeSummary> summarize(const std::vector<ExperimentRow>& rows, const std::vector<Regime>& regimes) {
    std::vector<RegimeSummary> out;
    for (Regime regime : regimes) {
        std::map<std::size_t, std::vector<const ExperimentRow*>> by_d;
        for (const ExperimentRow& r : rows) {
            if (r.n == regime_n(r.d, regime)) by_d[r.d].push_back(&r);
        }
        if (by_d.empty()) continue;
        RegimeSummary s;
        s.regime = regime;
        for (const auto& [d, group] : by_d) {
            RegimePoint p;
            p.d = d;
            p.n = regime_n(d, regime);
            std::vector<double> values;
            for (const ExperimentRow* r : group) {
                if (r->diverged) {
                    ++p.diverged;
                } else {
                    values.push_back(r->L_hat);
                }
            }
            p.used = values.size();
            if (!values.empty()) {
                double sum = 0.0;
                for (double v : values) sum += v;
                p.mean = sum / static_cast<double>(values.size());
                p.q10 = quantile(values, 0.1);
                p.q90 = quantile(values, 0.9);
            } else {
                p.mean = p.q10 = p.q90 = std::numeric_limits<double>::quiet_NaN();
            }
            s.points.push_back(p);
        }
        std::vector<double> xs, ys;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const RegimePoint& p : s.points) {
            if (p.used == 0 || !(p.mean > 0.0)) continue;
            xs.push_back(std::log10(static_cast<double>(p.d)));
            ys.push_back(std::log10(p.mean));
            lo = std::min(lo, p.mean);
            hi = std::max(hi, p.mean);
        }
        s.max_min_ratio = xs.empty() ? std::numeric_limits<double>::quiet_NaN() : hi / lo;
        if (xs.size() >= 2) {
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= static_cast<double>(xs.size());
            my /= static_cast<double>(xs.size());
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            s.slope = sxy / sxx;
        }
        out.push_back(s);
    }
    return out;
}

std::string summary_to_json(const std::vector<RegimeSummary>& summaries) {
    std::string list = "[";
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const RegimeSummary& s = summaries[i];
        std::string points = "[";
        for (std::size_t j = 0; j < s.points.size(); ++j) {
            const RegimePoint& p = s.points[j];
            points += std::string(j ? ", " : "") + "{\"d\": " + std::to_string(p.d) + ", \"n\": " + std::to_string(p.n) +
                      ", \"used\": " + std::to_string(p.used) + ", \"diverged\": " + std::to_string(p.diverged) +
                      ", \"mean_L\": " + json::number(p.mean) + ", \"q10\": " + json::number(p.q10) +
                      ", \"q90\": " + json::number(p.q90) + "}";
        }
        points += "]";
        json::Object o;
        o.str("regime", regime_name(s.regime))
            .str("label", regime_label(s.regime))
            .raw("points", points)
            .raw("slope", s.slope ? json::number(*s.slope) : "null")
            .num("max_min_ratio", s.max_min_ratio);
        std::string body = o.dump();
        while (!body.empty() && body.back() == '\n') body.pop_back();
        list += (i ? ", " : "") + body;
    }
    json::Object top;
    top.raw("regimes", list + "]");
    return top.dump();
}

void print_summary(std::ostream& out, const std::vector<RegimeSummary>& summaries) {
    char buf[160];
    for (const RegimeSummary& s : summaries) {
        out << "regime " << regime_name(s.regime) << " (" << regime_label(s.regime) << ")\n";
        out << "       d        n  used  diverged        mean L           q10           q90\n";
        for (const RegimePoint& p : s.points) {
            std::snprintf(buf, sizeof buf, "%8zu %8zu %5zu %9zu %13.6e %13.6e %13.6e\n", p.d, p.n, p.used,
                          p.diverged, p.mean, p.q10, p.q90);
            out << buf;
        }
        if (s.slope) {
            std::snprintf(buf, sizeof buf, "slope of log10(mean L) vs log10(d): %.4f\n", *s.slope);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "max/min of mean L: %.4f\n", s.max_min_ratio);
        out << buf;
    }
}

std::string render_svg(const std::vector<RegimeSummary>& summaries) {
    constexpr double width = 640, height = 440, left = 70, right = 160, top = 30, bottom = 60;
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (const RegimeSummary& s : summaries)
        for (const RegimePoint& p : s.points) {
            if (p.used == 0 || !(p.q10 > 0.0)) continue;
            dmin = std::min(dmin, static_cast<double>(p.d));
            dmax = std::max(dmax, static_cast<double>(p.d));
            ymin = std::min(ymin, p.q10);
            ymax = std::max(ymax, p.q90);
        }
    if (!(dmax > 0.0)) throw ArgumentError("nothing to plot: no positive L values");
    double lx0 = std::log10(dmin), lx1 = std::log10(dmax);
    double ly0 = std::floor(std::log10(ymin) * 4.0) / 4.0, ly1 = std::ceil(std::log10(ymax) * 4.0) / 4.0;
    if (lx1 - lx0 < 1e-9) {
        lx0 -= 0.1;
        lx1 += 0.1;
    }
    if (ly1 - ly0 < 1e-9) {
        ly0 -= 0.25;
        ly1 += 0.25;
    }
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double d) { return left + (std::log10(d) - lx0) / (lx1 - lx0) * pw; };
    auto py = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };
    char buf[256];
    auto fmt = [&](const char* f, auto... args) {
        std::snprintf(buf, sizeof buf, f, args...);
        return std::string(buf);
    };
    std::string svg = fmt(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
        width, height, width, height);
    svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left, top + ph, left + pw,
               top + ph);
    svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left, top, left, top + ph);
    std::set<std::size_t> ticks;
    for (const RegimeSummary& s : summaries)
        for (const RegimePoint& p : s.points) ticks.insert(p.d);
    for (std::size_t d : ticks) {
        const double x = px(static_cast<double>(d));
        svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", x, top + ph, x,
                   top + ph + 5);
        svg += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%zu</text>\n", x,
                   top + ph + 20, d);
    }
    for (double e = std::ceil(ly0 * 4.0) / 4.0; e <= ly1 + 1e-9; e += 0.25) {
        const double y = top + (ly1 - e) / (ly1 - ly0) * ph;
        svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left - 5, y, left, y);
        svg += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">%.3g</text>\n", left - 8, y + 4,
                   std::pow(10.0, e));
    }
    svg += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" text-anchor=\"middle\">d</text>\n", left + pw / 2,
               height - 15);
    svg += fmt("<text x=\"18\" y=\"%.2f\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 %.2f)\">L</text>\n",
               top + ph / 2, top + ph / 2);
    const char* colors[] = {"#1f77b4", "#d62728"};
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const RegimeSummary& s = summaries[i];
        const char* color = colors[s.regime == Regime::quadratic ? 0 : 1];
        std::string band, upper, lower, line;
        std::vector<const RegimePoint*> pts;
        for (const RegimePoint& p : s.points)
            if (p.used > 0 && p.q10 > 0.0) pts.push_back(&p);
        for (const RegimePoint* p : pts) upper += fmt("%.2f,%.2f ", px(static_cast<double>(p->d)), py(p->q90));
        for (auto it = pts.rbegin(); it != pts.rend(); ++it)
            lower += fmt("%.2f,%.2f ", px(static_cast<double>((*it)->d)), py((*it)->q10));
        band = upper + lower;
        if (!band.empty()) band.pop_back();
        svg += fmt("<polygon fill=\"%s\" fill-opacity=\"0.2\" stroke=\"none\" points=\"", color) + band + "\"/>\n";
        for (std::size_t j = 0; j < pts.size(); ++j)
            line += fmt("%s%.2f %.2f ", j ? "L " : "M ", px(static_cast<double>(pts[j]->d)), py(pts[j]->mean));
        if (!line.empty()) line.pop_back();
        svg += fmt("<path fill=\"none\" stroke=\"%s\" stroke-width=\"2\" d=\"", color) + line + "\"/>\n";
        for (const RegimePoint* p : pts)
            svg += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(static_cast<double>(p->d)),
                       py(p->mean), color);
        const double ly = top + 20 + 22 * static_cast<double>(i);
        svg += fmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"14\" height=\"10\" fill=\"%s\"/>\n", left + pw + 15, ly - 9,
                   color);
        svg += fmt("<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\">", left + pw + 35, ly) + regime_label(s.regime) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace lapdiag
