#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based file line of each data row, for error reporting past comments.
  std::vector<size_t> row_lines;

  int column(const std::string& name) const;  // -1 when absent
};

// Comma-separated, optional double-quoted fields, '#' comment lines skipped.
// The first non-comment line is the header (mandatory).
CsvTable read_csv(std::istream& in, const std::string& origin = "");
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);

}  // namespace avc
