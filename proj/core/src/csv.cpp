#include "scalenas/csv.hpp"

#include <sstream>
#include <stdexcept>

#include "scalenas/io_util.hpp"

namespace scalenas {

namespace {

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string& c = cells[i];
    if (c.find_first_of(",\n\r") != std::string::npos)
      throw std::invalid_argument("CSV cell contains a delimiter: " + c);
    if (i) out.push_back(',');
    out += c;
  }
  out.push_back('\n');
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace

std::string csv_to_string(const CsvTable& table) {
  if (table.header.empty())
    throw std::invalid_argument("CSV requires a header row");
  std::string out;
  append_row(out, table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("CSV row width differs from header");
    append_row(out, row);
  }
  return out;
}

CsvTable csv_from_string(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() && is.eof()) break;
    auto cells = split_row(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw std::invalid_argument("CSV row width differs from header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw std::invalid_argument("CSV is empty");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  atomic_write_file(path, csv_to_string(table));
}

CsvTable read_csv(const std::string& path) {
  try {
    return csv_from_string(read_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace scalenas
