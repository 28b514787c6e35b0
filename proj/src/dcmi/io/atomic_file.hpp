#pragma once

#include <filesystem>
#include <stdexcept>
#include <string_view>

namespace dcmi::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to "<path>.tmp" and renames over path, so readers never observe a
// half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace dcmi::io
