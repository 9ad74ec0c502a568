#pragma once

#include "cstree/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace cstree {

// Matrix file format: first line "rows,cols", then one comma-separated line
// per row. Values are written with 17 significant digits so that
// write -> read is an exact round trip.

void write_matrix_csv(std::ostream& os, const DenseMatrix& M);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& M);

DenseMatrix read_matrix_csv(std::istream& is);
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace cstree
