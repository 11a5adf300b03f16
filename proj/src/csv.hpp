#pragma once

// Minimal header-mapped CSV reader for the simple comma-separated inputs this
// project consumes (no quoting or embedded commas). Errors carry the 1-based
// line number and field name.

#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "flexcast/errors.hpp"
#include "flexcast/time_grid.hpp"

namespace flexcast {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ' || f.back() == '\t')) f.pop_back();
    std::size_t i = 0;
    while (i < f.size() && (f[i] == ' ' || f[i] == '\t')) ++i;
    f.erase(0, i);
  }
  return fields;
}

class CsvReader {
 public:
  CsvReader(std::istream& in, const std::vector<std::string>& required_columns) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) throw ParseError("empty CSV input, header required");
    auto names = split_csv_line(header);
    for (std::size_t i = 0; i < names.size(); ++i) columns_[names[i]] = i;
    for (const auto& c : required_columns) {
      if (!columns_.count(c)) throw ParseError("missing required column '" + c + "'");
    }
    line_no_ = 1;
  }

  bool next_row() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      // strip trailing CR, skip blank lines
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields_ = split_csv_line(line);
      return true;
    }
    return false;
  }

  int line_number() const { return line_no_; }

  const std::string& field(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw ParseError("unknown column '" + name + "'");
    if (it->second >= fields_.size()) {
      throw ParseError("row " + std::to_string(line_no_) + ": missing field '" + name + "'");
    }
    return fields_[it->second];
  }

  double double_field(const std::string& name) const {
    const std::string& s = field(name);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail(name, "not a number: '" + s + "'");
    return v;
  }

  DateTime datetime_field(const std::string& name) const {
    try {
      return parse_datetime(field(name));
    } catch (const ParseError& e) {
      fail(name, e.what());
    }
    return {};  // unreachable
  }

  [[noreturn]] void fail(const std::string& name, const std::string& why) const {
    throw ParseError("row " + std::to_string(line_no_) + ", field '" + name + "': " + why);
  }

 private:
  std::istream& in_;
  std::unordered_map<std::string, std::size_t> columns_;
  std::vector<std::string> fields_;
  int line_no_ = 0;
};

enum class Category;
Category parse_category(const std::string&);

inline Category parse_category_field(const CsvReader& r, const std::string& name) {
  try {
    return parse_category(r.field(name));
  } catch (const ParseError& e) {
    r.fail(name, e.what());
  }
}

}  // namespace flexcast
