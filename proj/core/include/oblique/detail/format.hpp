#ifndef OBLIQUE_DETAIL_FORMAT_HPP
#define OBLIQUE_DETAIL_FORMAT_HPP

#include <charconv>
#include <string>

namespace oblique::detail {

/// Shortest round-trip decimal form; deterministic across runs.
inline std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed 17-significant-digit form for the CSV contract.
inline std::string fmt17(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, buf + n);
}

} // namespace oblique::detail

#endif
