#include "covrecon/matrix_csv.hpp"

#include "covrecon/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace covrecon {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Matrix parse_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      // Blank lines are only allowed at the end of the file.
      std::string rest;
      while (std::getline(in, rest)) {
        if (!trim(rest).empty()) throw ParseError("blank line inside matrix", line_no, 0);
      }
      break;
    }
    std::vector<double> row;
    std::string_view view(line);
    std::size_t column = 0;
    while (true) {
      ++column;
      const auto comma = view.find(',');
      const std::string_view field = trim(view.substr(0, comma));
      double value = 0.0;
      const auto* end = field.data() + field.size();
      const auto [ptr, ec] = std::from_chars(field.data(), end, value);
      if (field.empty() || ec != std::errc() || ptr != end) {
        throw ParseError("cannot parse '" + std::string(field) + "' as a number", line_no,
                         column);
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      view.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("row has " + std::to_string(row.size()) + " columns, expected " +
                           std::to_string(rows.front().size()),
                       line_no, 0);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix file", 1, 0);
  const std::size_t cols = rows.front().size();
  if (rows.size() != cols) {
    // Report the first line past the square extent, or the last line if short.
    const std::size_t where = rows.size() > cols ? cols + 1 : rows.size();
    throw ParseError("matrix is not square: " + std::to_string(rows.size()) + " rows x " +
                         std::to_string(cols) + " columns",
                     where, 0);
  }
  const auto n = static_cast<Eigen::Index>(cols);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_matrix_csv(in);
}

CovarianceMatrix load_matrix_csv(const std::filesystem::path& path) {
  return CovarianceMatrix::validate(read_matrix_csv(path));
}

std::string format_real(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_matrix_csv(out, m);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void save_matrix_csv(const CovarianceMatrix& r, const std::filesystem::path& path) {
  save_matrix_csv(r.entries(), path);
}

}  // namespace covrecon
