#pragma once

#include <string>
#include <vector>

namespace pedcross {

/// Split one CSV line on commas (no quoting; the project's schemas never
/// emit quoted fields).
std::vector<std::string> split_csv_line(const std::string& line);

/// Whole file as lines, with trailing carriage returns stripped. Throws
/// std::runtime_error when the file cannot be read.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace pedcross
