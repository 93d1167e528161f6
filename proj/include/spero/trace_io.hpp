// Column-typed CSV and JSON-lines serialisation for trace records.
//
// A record type R provides
//   static const std::vector<Column>& columns();
//   std::vector<Cell> to_cells() const;
//   static R from_cells(const std::vector<Cell>&);
// Doubles are written in shortest round-trip form, so export then import
// reproduces every value bit for bit.
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"

#include "spero/errors.hpp"

namespace spero {

enum class ColumnKind { Number, Text };

struct Column {
    std::string name;
    std::string unit;  ///< empty for dimensionless or categorical columns
    ColumnKind kind = ColumnKind::Number;
};

using Cell = std::variant<double, std::string>;

enum class TraceFormat { Csv, Json };

inline TraceFormat trace_format_from_string(const std::string& s) {
    if (s == "csv") return TraceFormat::Csv;
    if (s == "json") return TraceFormat::Json;
    throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

inline const char* extension(TraceFormat f) { return f == TraceFormat::Csv ? ".csv" : ".jsonl"; }

inline std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc{} || r.ptr != e) {
        throw ConfigError("not a number: '" + s + "'");
    }
    return v;
}

inline double number(const Cell& c) { return std::get<double>(c); }
inline const std::string& text(const Cell& c) { return std::get<std::string>(c); }

namespace detail {

/// Text cells never need quoting: they are enum names and identifiers.
inline void require_plain(const std::string& s) {
    if (s.find_first_of(",\"\n\r") != std::string::npos) {
        throw ConfigError("CSV text cell contains a delimiter: '" + s + "'");
    }
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

/// Comment lines (prefixed "# ") precede the header; the last comment line
/// lists units per column.
template <class R>
void write_csv(std::ostream& os, const std::vector<R>& records,
               const std::vector<std::string>& comments = {}) {
    const auto& cols = R::columns();
    for (const auto& c : comments) os << "# " << c << '\n';
    os << "# units:";
    for (const auto& c : cols) os << ' ' << c.name << '[' << (c.unit.empty() ? "-" : c.unit) << ']';
    os << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].name;
    os << '\n';
    for (const auto& r : records) {
        const auto cells = r.to_cells();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            if (cols[i].kind == ColumnKind::Number) {
                os << format_double(number(cells[i]));
            } else {
                detail::require_plain(text(cells[i]));
                os << text(cells[i]);
            }
        }
        os << '\n';
    }
}

template <class R>
std::vector<R> read_csv(std::istream& is) {
    const auto& cols = R::columns();
    std::vector<R> out;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_csv(line);
        if (!header_seen) {
            if (fields.size() != cols.size()) throw ConfigError("CSV header has the wrong column count");
            for (std::size_t i = 0; i < cols.size(); ++i) {
                if (fields[i] != cols[i].name) {
                    throw ConfigError("CSV column " + std::to_string(i) + " is '" + fields[i] +
                                      "', expected '" + cols[i].name + "'");
                }
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != cols.size()) {
            throw ConfigError("CSV line " + std::to_string(lineno) + " has the wrong field count");
        }
        std::vector<Cell> cells;
        cells.reserve(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i].kind == ColumnKind::Number) cells.emplace_back(parse_double(fields[i]));
            else cells.emplace_back(fields[i]);
        }
        out.push_back(R::from_cells(cells));
    }
    if (!header_seen) throw ConfigError("CSV input has no header row");
    return out;
}

/// One JSON object per line, keys in column order.
template <class R>
void write_jsonl(std::ostream& os, const std::vector<R>& records) {
    const auto& cols = R::columns();
    for (const auto& r : records) {
        const auto cells = r.to_cells();
        nlohmann::ordered_json j;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i].kind == ColumnKind::Number) {
                const double v = number(cells[i]);
                // JSON has no inf/nan literals; those travel as strings.
                if (std::isfinite(v)) j[cols[i].name] = v;
                else j[cols[i].name] = format_double(v);
            } else {
                j[cols[i].name] = text(cells[i]);
            }
        }
        os << j.dump() << '\n';
    }
}

template <class R>
std::vector<R> read_jsonl(std::istream& is) {
    const auto& cols = R::columns();
    std::vector<R> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        std::vector<Cell> cells;
        cells.reserve(cols.size());
        for (const auto& c : cols) {
            if (!j.contains(c.name)) throw ConfigError("JSON record lacks key '" + c.name + "'");
            const auto& v = j.at(c.name);
            if (c.kind == ColumnKind::Number) {
                cells.emplace_back(v.is_string() ? parse_double(v.template get<std::string>()) : v.template get<double>());
            } else {
                cells.emplace_back(v.template get<std::string>());
            }
        }
        out.push_back(R::from_cells(cells));
    }
    return out;
}

template <class R>
void write_trace(std::ostream& os, const std::vector<R>& records, TraceFormat f,
                 const std::vector<std::string>& comments = {}) {
    if (f == TraceFormat::Csv) write_csv(os, records, comments);
    else write_jsonl(os, records);
}

template <class R>
std::vector<R> read_trace(std::istream& is, TraceFormat f) {
    return f == TraceFormat::Csv ? read_csv<R>(is) : read_jsonl<R>(is);
}

template <class R>
void export_trace(const std::string& path, const std::vector<R>& records, TraceFormat f,
                  const std::vector<std::string>& comments = {}) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_trace(os, records, f, comments);
    os.flush();
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

template <class R>
std::vector<R> import_trace(const std::string& path, TraceFormat f) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_trace<R>(is, f);
}

}  // namespace spero
