#include "cstree/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cstree {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& os, const DenseMatrix& M) {
  if (!M.allFinite()) throw IoError("write_matrix_csv: matrix has non-finite entries");
  os << M.rows() << "," << M.cols() << "\n";
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) os << ",";
      os << format_double(M(i, j));
    }
    os << "\n";
  }
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& M) {
  std::ofstream os(path);
  if (!os) throw IoError("write_matrix_csv: cannot open " + path.string());
  write_matrix_csv(os, M);
  if (!os) throw IoError("write_matrix_csv: write failed for " + path.string());
}

namespace {

double parse_double(const std::string& field, const std::string& context) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw IoError("read_matrix_csv: bad number '" + field + "' in " + context);
  return v;
}

}  // namespace

DenseMatrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("read_matrix_csv: empty input");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw IoError("read_matrix_csv: malformed header");
  const long rows = std::stol(line.substr(0, comma));
  const long cols = std::stol(line.substr(comma + 1));
  if (rows < 0 || cols < 0) throw IoError("read_matrix_csv: negative dimensions");
  DenseMatrix M(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw IoError("read_matrix_csv: truncated at row " + std::to_string(i));
    std::stringstream ss(line);
    std::string field;
    for (long j = 0; j < cols; ++j) {
      if (!std::getline(ss, field, ','))
        throw IoError("read_matrix_csv: row " + std::to_string(i) + " has too few fields");
      M(i, j) = parse_double(field, "row " + std::to_string(i));
    }
    if (std::getline(ss, field, ','))
      throw IoError("read_matrix_csv: row " + std::to_string(i) + " has too many fields");
  }
  if (!M.allFinite()) throw IoError("read_matrix_csv: non-finite entries");
  return M;
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_matrix_csv: cannot open " + path.string());
  return read_matrix_csv(is);
}

}  // namespace cstree
