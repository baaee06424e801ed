#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lagdtw::csv {

/// Shortest decimal text that parses back to the same double.
/// Infinities are written as "inf"/"-inf", NaN as "nan".
std::string format_number(double value);

/// Parses a number written by format_number (or any decimal/exponent form).
std::optional<double> parse_number(std::string_view text);

/// Splits one CSV record on commas; surrounding double quotes are stripped.
std::vector<std::string> split_line(std::string_view line);

/// Reads one line without its terminator (handles "\n" and "\r\n").
bool read_line(std::istream& in, std::string& line);

/// Opens a file for writing/reading in binary mode; throws Io on failure.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

/// Joins fields with commas and terminates with a Unix newline.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace lagdtw::csv
