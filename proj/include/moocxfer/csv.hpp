#pragma once

// Line-oriented CSV helpers and ISO-8601 timestamp parsing. The file formats
// here are plain comma-separated fields without quoting.

#include <cstdint>
#include <string>
#include <vector>

namespace moocxfer {

std::vector<std::string> split_csv_line(const std::string& line);

// Reads all data rows of a CSV file, checking the exact expected header.
// Throws std::runtime_error with the line number on malformed rows.
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expected_header);

// Seconds since the Unix epoch for "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS[Z]".
std::int64_t parse_iso8601(const std::string& text);

std::string format_double(double v);

long parse_long(const std::string& s, const std::string& context);
double parse_double(const std::string& s, const std::string& context);

}  // namespace moocxfer
