#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <cmath>

#include <Eigen/Dense>

#include "swp/core/csv.hpp"

namespace swp::csv {

struct LabeledMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  Eigen::MatrixXd values;
};

// First header cell is `corner`, the rest are column labels; every row
// starts with its label.
inline void write_matrix(std::ostream& out, const std::string& corner, const std::vector<std::string>& rows,
                         const std::vector<std::string>& cols, const Eigen::MatrixXd& values) {
  if (values.rows() != static_cast<Eigen::Index>(rows.size()) ||
      values.cols() != static_cast<Eigen::Index>(cols.size()))
    throw Error(Errc::shape_mismatch, "matrix shape does not match its labels");
  Row header{corner};
  header.insert(header.end(), cols.begin(), cols.end());
  write_row(out, header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Row r{rows[i]};
    for (Eigen::Index j = 0; j < values.cols(); ++j) r.push_back(format_double(values(static_cast<Eigen::Index>(i), j)));
    write_row(out, r);
  }
}

inline void write_matrix(const std::filesystem::path& path, const std::string& corner,
                         const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                         const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  write_matrix(out, corner, rows, cols, values);
}

// Reads a matrix written by write_matrix. Bad cells are reported by line and
// column label.
inline LabeledMatrix read_matrix(const Table& t, const std::string& source) {
  LabeledMatrix m;
  if (t.header.size() < 2) throw Error(Errc::schema_error, source + ": matrix needs at least one data column");
  m.cols.assign(t.header.begin() + 1, t.header.end());
  m.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(m.cols.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    m.rows.push_back(t.rows[i][0]);
    for (std::size_t j = 1; j < t.header.size(); ++j) {
      const auto where = source + " line " + std::to_string(t.line_numbers[i]) + " column '" + t.header[j] + "'";
      const double v = parse_double(t.rows[i][j], where);
      if (!std::isfinite(v)) throw Error(Errc::schema_error, where + ": non-finite value");
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = v;
    }
  }
  return m;
}

inline LabeledMatrix read_matrix(const std::filesystem::path& path) { return read_matrix(read(path), path.string()); }

}  // namespace swp::csv
