#pragma once

#include <stdexcept>
#include <string>

namespace scalenas {

struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes content to a sibling temp file and renames it into place, so
// readers never observe a partial file. Creates parent directories.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace scalenas
