#include "lapdiag/errors.hpp"
#include "lapdiag/models.hpp"
#include "lapdiag/random.hpp"
#include "lapdiag/sigmoid.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace lapdiag {

void Dataset::validate() const {
    if (features.rows() < 1 || features.cols() < 1) {
        throw ArgumentError("dataset needs n >= 1 and d >= 1");
    }
    if (labels.size() != static_cast<std::size_t>(features.rows())) {
        throw ArgumentError("dataset label count does not match feature rows");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw ArgumentError("dataset labels must be 0 or 1");
    }
    if (!all_finite(features)) throw ArgumentError("dataset features must be finite");
}

Dataset generate_dataset(std::size_t d, std::size_t n, const Vector& beta, std::uint64_t seed) {
    if (d < 1 || n < 1) throw ArgumentError("generate_dataset: d and n must be >= 1");
    if (beta.size() != static_cast<Eigen::Index>(d)) {
        throw ArgumentError("generate_dataset: beta has wrong length");
    }
    if (!all_finite(beta)) throw ArgumentError("generate_dataset: beta must be finite");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Dataset data;
    data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    data.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
            data.features(row, j) = normal(rng);
        }
        const double p = sigmoid(data.features.row(row).dot(beta));
        data.labels[i] = uniform(rng) < p ? 1 : 0;
    }
    return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    data.validate();
    out << 'y';
    for (std::size_t j = 1; j <= data.d(); ++j) out << ",x" << j;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < data.n(); ++i) {
        out << data.labels[i];
        for (std::size_t j = 0; j < data.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g",
                          data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out << ',' << buf;
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what) {
    throw ArgumentError("dataset CSV line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("dataset CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "y") bad_line(1, "header must be y,x1,...,xd");
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j] != "x" + std::to_string(j)) bad_line(1, "header must be y,x1,...,xd");
    }
    const std::size_t d = header.size() - 1;
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != d + 1) bad_line(line_no, "expected " + std::to_string(d + 1) + " fields");
        if (fields[0] == "0") {
            labels.push_back(0);
        } else if (fields[0] == "1") {
            labels.push_back(1);
        } else {
            bad_line(line_no, "label must be 0 or 1");
        }
        for (std::size_t j = 1; j <= d; ++j) {
            double v = 0.0;
            const auto f = fields[j];
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
                bad_line(line_no, "feature " + std::to_string(j) + " is not a finite number");
            }
            values.push_back(v);
        }
    }
    if (labels.empty()) throw ArgumentError("dataset CSV has no data rows");
    Dataset data;
    const auto n = static_cast<Eigen::Index>(labels.size());
    data.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>(values.data(), n,
                                                                     static_cast<Eigen::Index>(d));
    data.labels = std::move(labels);
    data.validate();
    return data;
}

}  // namespace lapdiag
