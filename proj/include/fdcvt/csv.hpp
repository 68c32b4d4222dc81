#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fdcvt/errors.hpp"
#include "fdcvt/linalg.hpp"

namespace fdcvt {

/// Problems reading or parsing input files.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A parsed numeric table: header names plus an n x k value matrix.
struct Dataset {
    std::vector<std::string> columns;
    Matrix values;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }
};

namespace csv_detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

/// Locale-independent full-field double parse.
inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    cell = trim(cell);
    if (cell.empty())
        throw ParseError("missing value at data row " + std::to_string(row) + ", column " +
                         std::to_string(col));
    double v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError("cannot parse '" + std::string(cell) + "' at data row " +
                         std::to_string(row) + ", column " + std::to_string(col));
    return v;
}

} // namespace csv_detail

/// Read a comma-separated file with a mandatory header row. LF and CRLF
/// line endings are both accepted; decimal points only (locale
/// independent); a missing or non-numeric cell is a hard error.
inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = std::move(buffer).str();
    if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0)
        content.erase(0, 3);  // UTF-8 BOM

    Dataset ds;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t eol = content.find('\n', start);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + start, eol - start);
        start = eol + 1;
        line = csv_detail::trim(line);
        if (line.empty()) {
            if (start > content.size()) break;
            continue;
        }
        const auto fields = csv_detail::split_fields(line);
        if (line_no == 0) {
            for (auto f : fields) ds.columns.emplace_back(csv_detail::trim(f));
        } else {
            if (fields.size() != ds.columns.size())
                throw ParseError("data row " + std::to_string(line_no) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(ds.columns.size()));
            std::vector<double> row(fields.size());
            for (std::size_t c = 0; c < fields.size(); ++c)
                row[c] = csv_detail::parse_cell(fields[c], line_no, c);
            rows.push_back(std::move(row));
        }
        ++line_no;
    }
    if (ds.columns.empty()) throw ParseError("'" + path + "' has no header row");
    if (rows.empty()) throw ParseError("'" + path + "' has no data rows");

    ds.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(ds.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            ds.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return ds;
}

/// Resolve a response column given a header name or a 0-based index.
inline Index resolve_column(const Dataset& ds, const std::string& spec) {
    for (std::size_t i = 0; i < ds.columns.size(); ++i)
        if (ds.columns[i] == spec) return static_cast<Index>(i);
    int idx = -1;
    const auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), idx);
    if (ec == std::errc{} && ptr == spec.data() + spec.size() && idx >= 0 &&
        idx < static_cast<int>(ds.columns.size()))
        return idx;
    throw ParseError("response column '" + spec + "' not found");
}

} // namespace fdcvt
