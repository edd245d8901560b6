#pragma once

#include <string>
#include <vector>

namespace scalenas {

// Minimal numeric CSV: header-first, comma-delimited, LF-terminated, no
// quoting (cells must not contain commas or newlines).

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_to_string(const CsvTable& table);
CsvTable csv_from_string(const std::string& text);

// Atomic write / whole-file read of a table.
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace scalenas
