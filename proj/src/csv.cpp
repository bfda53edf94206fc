#include "adopt/csv.hpp"

#include <charconv>
#include <cmath>

#include "adopt/common.hpp"

namespace adopt {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                                : comma - start);
    out.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvReader::CsvReader(const std::string& path, bool has_header) : path_(path), in_(path) {
  if (!in_) throw ValidationError("cannot open " + path);
  if (has_header) {
    std::vector<std::string> fields;
    if (next(fields)) header_ = std::move(fields);
  }
}

bool CsvReader::next(std::vector<std::string>& fields) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    std::string_view view = trim(raw);
    if (view.empty() || view.front() == '#') continue;
    fields = split_csv_line(view);
    return true;
  }
  return false;
}

void CsvReader::fail(const std::string& what) const { throw ParseError(path_, line_, what); }

long long CsvReader::as_int(const std::string& field, const char* column) const {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    fail(std::string("bad integer in column '") + column + "': '" + field + "'");
  return value;
}

double CsvReader::as_double(const std::string& field, const char* column) const {
  double value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
    fail(std::string("bad number in column '") + column + "': '" + field + "'");
  return value;
}

}  // namespace adopt
