#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace adopt {

/// Minimal reader for the comma-separated flat files used by the ingest layer.
/// Blank lines and lines starting with '#' are skipped; the first
/// non-blank line is treated as a header when `has_header` is set.
class CsvReader {
 public:
  CsvReader(const std::string& path, bool has_header = true);

  /// Reads the next data row into `fields`; returns false at end of file.
  bool next(std::vector<std::string>& fields);

  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }
  const std::vector<std::string>& header() const { return header_; }

  [[noreturn]] void fail(const std::string& what) const;

  long long as_int(const std::string& field, const char* column) const;
  double as_double(const std::string& field, const char* column) const;

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
};

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace adopt
