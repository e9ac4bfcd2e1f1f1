#include "lapdiag/json.hpp"

#include <cmath>
#include <cstdio>

namespace lapdiag::json {

std::string number(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

std::string array(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += number(v(i));
    }
    return out + "]";
}

std::string array(const std::vector<double>& v) {
    return array(Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))));
}

std::string array(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += string(v[i]);
    }
    return out + "]";
}

std::string matrix(const Matrix& m) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += ", ";
        out += array(Vector(m.row(i).transpose()));
    }
    return out + "]";
}

Object& Object::raw(const std::string& key, const std::string& value) {
    members_.emplace_back(key, value);
    return *this;
}

std::string Object::dump() const {
    std::string out = "{\n";
    for (std::size_t i = 0; i < members_.size(); ++i) {
        out += "  " + string(members_[i].first) + ": " + members_[i].second;
        out += i + 1 < members_.size() ? ",\n" : "\n";
    }
    return out + "}\n";
}

}  // namespace lapdiag::json
