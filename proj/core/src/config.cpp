#include "spga/config.hpp"

#include <charconv>
#include <cstdint>

namespace spga {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<ConfigSection> parse_kv(const std::string& text) {
  std::vector<ConfigSection> sections;
  sections.push_back({"", 0, {}});

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string raw = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;

    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(lineno, "unterminated section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) {
        throw ParseError(lineno, "empty section header");
      }
      sections.push_back({name, lineno, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(lineno, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(lineno, "empty key");
    }
    sections.back().entries.push_back({key, value, lineno});
  }
  return sections;
}

double parse_real(const ConfigEntry& entry) {
  double v = 0.0;
  const char* begin = entry.value.data();
  const char* end = begin + entry.value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(entry.line,
                     "key '" + entry.key + "': expected a real number, got '" +
                         entry.value + "'");
  }
  return v;
}

std::size_t parse_count(const ConfigEntry& entry) {
  return static_cast<std::size_t>(parse_u64(entry));
}

std::uint64_t parse_u64(const ConfigEntry& entry) {
  std::uint64_t v = 0;
  const char* begin = entry.value.data();
  const char* end = begin + entry.value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(entry.line,
                     "key '" + entry.key +
                         "': expected a non-negative integer, got '" +
                         entry.value + "'");
  }
  return v;
}

bool parse_on_off(const ConfigEntry& entry) {
  if (entry.value == "on") return true;
  if (entry.value == "off") return false;
  throw ParseError(entry.line, "key '" + entry.key +
                                   "': expected on or off, got '" +
                                   entry.value + "'");
}

std::vector<std::uint64_t> parse_u64_list(const ConfigEntry& entry) {
  std::vector<std::uint64_t> out;
  const std::string& s = entry.value;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = s.substr(start, comma - start);
    std::uint64_t v = 0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || item.empty()) {
      throw ParseError(entry.line, "key '" + entry.key +
                                       "': expected a comma-separated "
                                       "integer list, got '" +
                                       s + "'");
    }
    out.push_back(v);
    start = comma + 1;
    if (comma == s.size()) break;
  }
  return out;
}

}  // namespace spga
