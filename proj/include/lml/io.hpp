#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace lml::io {

// 17 significant digits, round-trip exact.
std::string format_double(double x);

// Writes through a temporary sibling file and renames it into place, so
// `path` either keeps its old content or receives the complete new one.
void write_atomically(const std::filesystem::path &path,
                      const std::function<void(std::ostream &)> &writer,
                      bool binary = false);

// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string &line);

} // namespace lml::io
