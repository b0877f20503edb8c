#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowdist::csv {

struct Row {
    std::size_t line = 0; // 1-based line number in the source
    std::vector<std::string> cells;
};

/// Splits comma-separated lines. Blank lines are skipped, cells are trimmed,
/// surrounding double quotes are removed, and a leading UTF-8 BOM is ignored.
/// Lines whose first character is '#' are returned through `comments` when
/// given, and skipped otherwise.
std::vector<Row> read_table(std::istream &in, std::vector<std::string> *comments = nullptr);

/// Parses a decimal number (optional exponent). "inf" maps to +infinity when
/// allow_infinity is set; anything else non-numeric yields nullopt.
std::optional<double> parse_number(std::string_view text, bool allow_infinity = false);

/// 12 significant digits, "inf" for +infinity.
std::string format_number(double value);

std::string join(const std::vector<std::string> &cells);

} // namespace flowdist::csv
