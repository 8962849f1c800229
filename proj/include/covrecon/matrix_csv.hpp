#pragma once

#include "covrecon/covariance.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace covrecon {

/// Headerless comma-separated matrix, one row per line, "%.17g" entries.
/// Parses any square numeric grid; ParseError carries the 1-based location.
Matrix parse_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Parses, then validates symmetry and positive semi-definiteness.
CovarianceMatrix load_matrix_csv(const std::filesystem::path& path);

void write_matrix_csv(std::ostream& out, const Matrix& m);
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);
void save_matrix_csv(const CovarianceMatrix& r, const std::filesystem::path& path);

/// Shortest-round-trip-safe decimal form used by every CSV writer.
std::string format_real(double value);

}  // namespace covrecon
