#include "spga/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace spga {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general);
  return std::string(buf, res.ptr);
}

std::string format_double(double v, int significant_digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, significant_digits);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_escape(fields[i]);
  }
  line += "\r\n";
  return line;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  Matrix m;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    row.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw std::runtime_error(path.string() + ":" +
                                 std::to_string(lineno) +
                                 ": expected a number");
      }
      row.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw std::runtime_error(path.string() + ":" +
                                 std::to_string(lineno) +
                                 ": expected ',' between fields");
      }
      ++p;
    }
    m.append_row(row);
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += "\r\n";
  }
  write_file_atomic(path, out);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace spga
