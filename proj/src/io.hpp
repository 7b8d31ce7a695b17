#pragma once

// Small text and file helpers shared by the file formats.

#include <string>
#include <string_view>
#include <vector>

namespace ws::io {

std::string read_file(const std::string& path);

/// Writes to `path.tmp` then renames, so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view contents);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

/// Throws ErrorCode::parse naming `where` on failure.
double parse_double(std::string_view s, const std::string& where);
long long parse_int(std::string_view s, const std::string& where);

}  // namespace ws::io
