#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spga {

// Parse failure in a key=value config; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// One `key = value` pair with its source line.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// A `[header]` block; entries before the first header land in a section
// with an empty name.
struct ConfigSection {
  std::string name;  // full header text, e.g. "variant baseline"
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;
};

// Flat key=value syntax: one pair per line, `#` comments, optional
// `[section]` headers. No quoting or continuation lines.
std::vector<ConfigSection> parse_kv(const std::string& text);

// Typed readers; each throws ParseError naming the entry's line.
double parse_real(const ConfigEntry& entry);
std::size_t parse_count(const ConfigEntry& entry);
std::uint64_t parse_u64(const ConfigEntry& entry);
bool parse_on_off(const ConfigEntry& entry);
std::vector<std::uint64_t> parse_u64_list(const ConfigEntry& entry);

}  // namespace spga
