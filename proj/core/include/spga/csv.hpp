#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spga/matrix.hpp"

namespace spga {

// Shortest round-trip decimal form of v (locale independent).
std::string format_double(double v);

// Fixed significant-digit form, e.g. for the quantile CLI output.
std::string format_double(double v, int significant_digits);

// RFC 4180 quoting; applied only when the field needs it.
std::string csv_escape(const std::string& field);

std::string csv_line(const std::vector<std::string>& fields);

// Headerless numeric CSV, one feature vector per row.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace spga
