#ifndef QEDFLOW_SRC_CSV_HPP
#define QEDFLOW_SRC_CSV_HPP

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "qedflow/dates.hpp"
#include "qedflow/registers.hpp"

namespace qedflow::detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Plain comma splitting; register fields never contain quoted commas.
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Reads the next non-blank line; returns false at end of stream.
inline bool next_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!trim(line).empty()) return true;
    }
    return false;
}

// Typed access to the fields of one CSV row; failures name source, row
// and column.
struct RowReader {
    std::string_view source;
    std::size_t row;
    const std::vector<std::string>& fields;
    const std::vector<std::string>& names;

    const std::string& raw(std::size_t col) const { return fields[col]; }

    [[noreturn]] void fail(std::size_t col, const std::string& what) const {
        throw RegisterError(std::string(source), row, names[col], what);
    }

    std::string text(std::size_t col) const {
        if (fields[col].empty()) fail(col, "empty value");
        return fields[col];
    }

    Date date(std::size_t col) const {
        try {
            return parse_date(fields[col]);
        } catch (const std::invalid_argument& e) {
            fail(col, e.what());
        }
    }

    double money(std::size_t col) const {
        const std::string& s = fields[col];
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
            fail(col, "malformed amount '" + s + "'");
        }
        return value;
    }

    long integer(std::size_t col) const {
        const std::string& s = fields[col];
        long value = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
            fail(col, "malformed integer '" + s + "'");
        }
        return value;
    }

    bool boolean(std::size_t col) const {
        if (fields[col] == "true") return true;
        if (fields[col] == "false") return false;
        fail(col, "expected true or false, got '" + fields[col] + "'");
    }
};

inline std::vector<std::string> read_header(std::istream& in, std::string_view source,
                                     std::string_view expected) {
    std::string line;
    if (!next_line(in, line)) {
        throw RegisterError(std::string(source), 1, "", "missing header");
    }
    if (trim(line) != expected) {
        throw RegisterError(std::string(source), 1, "",
                            "unexpected header (expected '" + std::string(expected) + "')");
    }
    return split_csv(expected);
}

}  // namespace qedflow::detail

#endif  // QEDFLOW_SRC_CSV_HPP
