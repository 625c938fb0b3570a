#pragma once

#include <string>
#include <vector>

namespace anchor {

// Minimal CSV support for the formats this project reads and writes:
// header row required, comma separated, '.' decimal point, UTF-8, no quoting.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv_file(const std::string& path);

// Shortest round-trip formatting; used everywhere a double becomes text so
// outputs are byte-stable.
std::string format_double(double v);

// Writes content to `path` atomically (temp file in the same directory,
// then rename).
void atomic_write_file(const std::string& path, const std::string& content);

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

}  // namespace anchor
