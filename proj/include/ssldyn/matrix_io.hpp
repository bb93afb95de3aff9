#pragma once

#include <string>

#include "ssldyn/spectral.hpp"

namespace ssldyn {

// Matrix CSV layout: a "# rows,cols" comment line followed by one CSV row per
// matrix row, values printed with 17 significant digits (round-trip exact).
void save_matrix_csv(const Matrix& M, const std::string& path);
Matrix load_matrix_csv(const std::string& path);

// JSON object {rows, cols, data:[...]} with data in row-major order.
void save_matrix_json(const Matrix& M, const std::string& path);
Matrix load_matrix_json(const std::string& path);

/// Format a double with 17 significant digits.
std::string format_double(double x);

}  // namespace ssldyn
