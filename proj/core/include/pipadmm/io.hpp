#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pipadmm/types.hpp"

namespace pipadmm {

/// Shortest round-trip safe decimal form (17 significant digits).
std::string format_double(double v);

/// Comma-separated numbers, '.' decimal point, scientific notation allowed.
/// Blank lines are skipped; every other row must have the same number of
/// fields. Throws IoError with the offending line number.
Matrix parse_csv(std::istream& in, bool header = false, const std::string& source = "<stream>");
Matrix read_csv_matrix(const std::string& path, bool header = false);
/// A single-column file.
Vector read_csv_vector(const std::string& path, bool header = false);

void write_csv(std::ostream& out, MatrixRef M, const std::vector<std::string>& header = {});
void write_csv_matrix(const std::string& path, MatrixRef M, const std::vector<std::string>& header = {});
void write_csv_vector(const std::string& path, VectorRef v, const std::string& header = {});

}  // namespace pipadmm
