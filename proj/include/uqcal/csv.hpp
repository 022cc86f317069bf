#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uqcal/errors.hpp"
#include "uqcal/summary.hpp"

namespace uqcal::csv {

/// Full round-trip precision for machine outputs.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// 4 significant digits for human-facing summaries.
inline std::string format_human(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string quote_if_needed(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// RFC-4180 writer: header row, comma separators, CRLF line endings.
class Writer {
  public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw invalid_input("cannot open for writing: " + path);
        path_ = path;
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote_if_needed(fields[i]);
        }
        out_ << "\r\n";
    }

    void close() {
        out_.close();
        if (!out_) throw invalid_input("write failed: " + path_);
    }

  private:
    std::ofstream out_;
    std::string path_;
};

/// RFC-4180 reader (quoted fields, CRLF or LF). Returns rows of raw strings.
inline std::vector<std::vector<std::string>> parse(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, field_started = false;
    char c;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        if (field_started || !field.empty() || !row.empty()) {
            end_field();
            rows.push_back(std::move(row));
            row.clear();
        }
    };
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get(c);
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; field_started = true; break;
            case ',': end_field(); field_started = true; break;
            case '\r': break;
            case '\n': end_row(); break;
            default: field += c; field_started = true;
        }
    }
    end_row();
    return rows;
}

inline std::vector<std::vector<std::string>> parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot open: " + path);
    return parse(in);
}

inline double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw invalid_input("not a number at row " + std::to_string(row + 1) + ", column " +
                            std::to_string(col + 1) + ": '" + s + "'");
    return v;
}

/// D1 data format: one time series per row, first column dt, remaining
/// columns y(0)..y(T); all rows equal length. An optional header row
/// (detected by a non-numeric first cell) is skipped.
inline std::vector<TimeSeries> load_series(const std::string& path) {
    const auto rows = parse_file(path);
    if (rows.empty()) throw invalid_input("data file is empty: " + path);
    std::size_t start = 0;
    {
        char* end = nullptr;
        std::strtod(rows[0][0].c_str(), &end);
        if (end == rows[0][0].c_str() || *end != '\0') start = 1; // header row
    }
    if (start >= rows.size()) throw invalid_input("data file has no data rows: " + path);
    std::vector<TimeSeries> series;
    const std::size_t width = rows[start].size();
    if (width < 3) throw invalid_input("data rows need dt plus at least 2 samples");
    for (std::size_t i = start; i < rows.size(); ++i) {
        if (rows[i].size() != width)
            throw invalid_input("ragged data row " + std::to_string(i + 1) + " in " + path);
        TimeSeries ts;
        ts.dt = parse_double(rows[i][0], i, 0);
        ts.values.reserve(width - 1);
        for (std::size_t j = 1; j < width; ++j)
            ts.values.push_back(parse_double(rows[i][j], i, j));
        ts.validate();
        series.push_back(std::move(ts));
    }
    return series;
}

inline void save_series(const std::string& path, const std::vector<TimeSeries>& series) {
    Writer w(path);
    if (series.empty()) throw invalid_input("no series to save");
    std::vector<std::string> header{"dt"};
    for (std::size_t t = 0; t < series.front().values.size(); ++t)
        header.push_back("y" + std::to_string(t));
    w.row(header);
    for (const auto& ts : series) {
        std::vector<std::string> row{format_full(ts.dt)};
        for (double v : ts.values) row.push_back(format_full(v));
        w.row(row);
    }
    w.close();
}

} // namespace uqcal::csv
