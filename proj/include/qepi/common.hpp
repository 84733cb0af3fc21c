// Shared small utilities: error types, number formatting, CSV field handling.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace qepi {

// Raised when a requested configuration cannot run at all (e.g. a qubit
// count above the simulable cap). The CLI maps this to exit code 3;
// ordinary input errors map to exit code 2.
class infeasible_error : public std::runtime_error {
  public:
    explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Shortest round-trip decimal form of a double. Used everywhere a float
// reaches a file so outputs are byte-stable and re-parse exactly.
inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed-precision form for figures, where shortest form would be noisy.
inline std::string fmt_fixed(double v, int precision) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view field, const std::string& context) {
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw std::runtime_error(context + ": expected a number, got \"" + std::string(field) + "\"");
    }
    return v;
}

inline long parse_long(std::string_view field, const std::string& context) {
    long v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw std::runtime_error(context + ": expected an integer, got \"" + std::string(field) + "\"");
    }
    return v;
}

inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Nearest-rank percentile of an unsorted sample; q in [0,1].
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty sample");
    std::sort(values.begin(), values.end());
    if (q <= 0.0) return values.front();
    if (q >= 1.0) return values.back();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    if (rank == 0) rank = 1;
    return values[rank - 1];
}

}  // namespace qepi
