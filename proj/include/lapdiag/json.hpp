#pragma once

#include "lapdiag/linalg.hpp"

#include <string>
#include <vector>

namespace lapdiag::json {

/// 17 significant digits, `null` for NaN and infinities.
std::string number(double x);
std::string string(const std::string& s);
std::string array(const Vector& v);
std::string array(const std::vector<double>& v);
std::string array(const std::vector<std::string>& v);
/// Row-major array of rows.
std::string matrix(const Matrix& m);

/// Accumulates `"key": value` members of one object, in insertion order.
class Object {
public:
    Object& raw(const std::string& key, const std::string& value);
    Object& num(const std::string& key, double value) { return raw(key, number(value)); }
    Object& integer(const std::string& key, long long value) {
        return raw(key, std::to_string(value));
    }
    Object& str(const std::string& key, const std::string& value) {
        return raw(key, string(value));
    }
    /// Pretty-printed with two-space indentation and a trailing newline.
    std::string dump() const;

private:
    std::vector<std::pair<std::string, std::string>> members_;
};

}  // namespace lapdiag::json
