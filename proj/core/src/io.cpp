#include "pipadmm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "pipadmm/error.hpp"

namespace pipadmm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError(source + ":" + std::to_string(line) + ": cannot parse '" + std::string(field) + "' as a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Matrix parse_csv(std::istream& in, bool header, const std::string& source) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t lineno = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    Index count = 0;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      values.push_back(parse_field(rest.substr(0, comma), source, lineno));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw IoError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) + " fields, found " +
                    std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw IoError(source + ": no data rows");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) M(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return M;
}

Matrix read_csv_matrix(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_csv(in, header, path);
}

Vector read_csv_vector(const std::string& path, bool header) {
  const Matrix M = read_csv_matrix(path, header);
  if (M.cols() != 1) {
    throw IoError(path + ": expected a single column, found " + std::to_string(M.cols()));
  }
  return M.col(0);
}

void write_csv(std::ostream& out, MatrixRef M, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
    out << '\n';
  }
}

void write_csv_matrix(const std::string& path, MatrixRef M, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, M, header);
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_csv_vector(const std::string& path, VectorRef v, const std::string& header) {
  const Matrix M = v;
  write_csv_matrix(path, M, header.empty() ? std::vector<std::string>{} : std::vector<std::string>{header});
}

}  // namespace pipadmm
