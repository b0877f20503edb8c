#include "flowdist/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>

namespace flowdist::csv {

namespace {

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::string unquote(std::string_view cell) {
    cell = trim(cell);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
        cell = cell.substr(1, cell.size() - 2);
    }
    return std::string(cell);
}

} // namespace

std::vector<Row> read_table(std::istream &in, std::vector<std::string> *comments) {
    std::vector<Row> rows;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view(line);
        if (number == 1 && view.starts_with("\xEF\xBB\xBF")) {
            view.remove_prefix(3);
        }
        if (trim(view).empty()) {
            continue;
        }
        if (trim(view).front() == '#') {
            if (comments != nullptr) {
                comments->emplace_back(trim(view).substr(1));
            }
            continue;
        }
        Row row;
        row.line = number;
        std::size_t start = 0;
        while (true) {
            const auto comma = view.find(',', start);
            row.cells.push_back(unquote(view.substr(start, comma - start)));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<double> parse_number(std::string_view text, bool allow_infinity) {
    text = trim(text);
    if (text.empty()) {
        return std::nullopt;
    }
    if (text == "inf") {
        if (allow_infinity) {
            return std::numeric_limits<double>::infinity();
        }
        return std::nullopt;
    }
    // from_chars also accepts "nan"/"inf" spellings; restrict to plain decimals.
    for (const char c : text) {
        const bool ok = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' ||
                        c == 'E';
        if (!ok) {
            return std::nullopt;
        }
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::string format_number(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    if (value == 0.0) {
        return "0";
    }
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

std::string join(const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k != 0) {
            out += ',';
        }
        out += cells[k];
    }
    return out;
}

} // namespace flowdist::csv
