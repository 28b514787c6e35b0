#include "dcmi/io/atomic_file.hpp"

#include <fstream>
#include <system_error>

namespace dcmi::io {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto staged = path;
  staged += ".tmp";
  {
    std::ofstream out(staged, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + staged.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(staged, ignored);
      throw IoError("failed writing " + staged.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(staged, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(staged, ignored);
    throw IoError("cannot move " + staged.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace dcmi::io
