#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace itrack::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Fixed six fractional digits; used for every currency amount.
std::string format_currency(double v);
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace itrack::io
