#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netscale::detail {

// Shortest round-trip representation; locale independent.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

inline std::string format_optional(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string{};
}

inline std::optional<double> parse_double(std::string_view s) {
    double value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

/// RFC 4180 quoting for a single CSV field.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Read one RFC 4180 record (quoted fields may span lines). Returns false at
/// end of input. CRLF terminators are accepted.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false, was_quoted = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c != '"') field += c;
            else if (in.peek() == '"') field += static_cast<char>(in.get());
            else quoted = false;
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\n') {
            break;
        } else if (c == '\r' && (in.peek() == '\n' || in.peek() == std::char_traits<char>::eof())) {
            continue;
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return true;
}

}  // namespace netscale::detail
