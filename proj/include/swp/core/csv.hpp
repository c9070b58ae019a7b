#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "swp/core/error.hpp"

namespace swp::csv {

using Row = std::vector<std::string>;

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << quote(row[i]);
  }
  out << '\n';
}

struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// RFC 4180 reader. Quoted fields may contain commas, quotes ("") and
// newlines. Every row must have as many fields as the header.
inline Table read(std::istream& in, const std::string& source = "csv") {
  Table t;
  Row row;
  std::string field;
  bool quoted = false, at_field_start = true, any = false;
  std::size_t line = 1, row_line = 1;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (!(row.size() == 1 && row[0].empty() && !any)) {
      if (t.header.empty()) {
        t.header = std::move(row);
      } else {
        if (row.size() != t.header.size())
          throw Error(Errc::schema_error, source + " line " + std::to_string(row_line) + ": expected " +
                                              std::to_string(t.header.size()) + " fields, got " +
                                              std::to_string(row.size()));
        t.rows.push_back(std::move(row));
        t.line_numbers.push_back(row_line);
      }
    }
    row.clear();
    any = false;
    at_field_start = true;
  };
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      at_field_start = true;
      any = true;
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      end_row();
      row_line = ++line;
    } else {
      field += c;
      at_field_start = false;
      any = true;
    }
  }
  if (quoted) throw Error(Errc::schema_error, source + ": unterminated quoted field");
  if (any || !field.empty()) end_row();
  if (t.header.empty()) throw Error(Errc::schema_error, source + ": empty file");
  return t;
}

inline Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read(in, path.string());
}

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Index of `name` in the header, or schema_error.
inline std::size_t column(const Table& t, std::string_view name, const std::string& source = "csv") {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw Error(Errc::schema_error, source + ": missing column '" + std::string(name) + "'");
}

inline double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(Errc::schema_error, where + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(Errc::schema_error, where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace swp::csv
