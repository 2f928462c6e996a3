#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace canopy::textio {

// Splits on commas; fields are trimmed of surrounding blanks.
std::vector<std::string_view> split_fields(std::string_view line);

std::string_view trim(std::string_view s);

// Full-field numeric parse. Throws ParseError(line) on garbage.
double parse_double(std::string_view field, std::size_t line);
long long parse_int(std::string_view field, std::size_t line);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

// Reads all lines; strips a trailing '\r'. Throws Error when unreadable.
std::vector<std::string> read_lines(const std::string& path);

// Atomically replaces `path` with `content`.
void write_file(const std::string& path, const std::string& content);

}  // namespace canopy::textio
