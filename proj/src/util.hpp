#pragma once

// Internal parsing helpers shared by the .cpp files; not installed.

#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

#include "campmon/errors.hpp"

namespace campmon::detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("bad " + what + ": '" + s + "'");
    return v;
}

inline std::int64_t parse_i64(const std::string& s, const std::string& what) {
    return parse_number<std::int64_t>(s, what);
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    return parse_number<std::uint64_t>(s, what);
}

inline int parse_int(const std::string& s, const std::string& what) {
    return parse_number<int>(s, what);
}

inline double parse_double(const std::string& s, const std::string& what) {
    return parse_number<double>(s, what);
}

} // namespace campmon::detail
