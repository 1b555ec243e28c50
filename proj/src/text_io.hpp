#pragma once

// CSV and number helpers shared by the readers and report writers.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace calibench::detail {

// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv_line(std::string_view line);

// Quotes a field if it contains a comma, quote or leading/trailing space.
std::string csv_escape(std::string_view field);

std::string_view trim(std::string_view s);

// Strict '.'-decimal parse of the whole (trimmed) string.
std::optional<double> parse_double(std::string_view s);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace calibench::detail
