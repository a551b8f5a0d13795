#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fusionkit::strings {

std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits on '\n', dropping a trailing '\r' from each line. A final empty
/// segment after the last newline is not returned.
std::vector<std::string_view> lines(std::string_view s);

std::string_view trim(std::string_view s);

/// Canonical non-negative decimal: digits only, no sign, no leading zeros.
std::optional<std::int64_t> parse_canonical_uint(std::string_view s);

/// Decimal integer, optional leading '-', surrounding whitespace not allowed.
std::optional<std::int64_t> parse_int(std::string_view s);

/// Finite decimal number.
std::optional<double> parse_double(std::string_view s);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

std::string ascii_lower(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view content);

} // namespace fusionkit::strings
