#include "lml/io.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace lml::io {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomically(const std::filesystem::path &path,
                      const std::function<void(std::ostream &)> &writer,
                      bool binary) {
  namespace fs = std::filesystem;
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::random_device rd;
  const fs::path tmp =
      path.string() + ".tmp" + std::to_string(rd() & 0xffffffu);
  try {
    {
      std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc
                                    : std::ios::trunc);
      if (!out)
        throw std::runtime_error("cannot open " + tmp.string());
      writer(out);
      out.flush();
      if (!out)
        throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace lml::io
