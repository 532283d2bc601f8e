#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace genderprobe::text {

std::string_view trim(std::string_view s);

// Lowercases ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters.
// Other code points (Devanagari has no case) pass through unchanged.
std::string utf8_lower(std::string_view s);

// Number of code points; invalid bytes count as one each.
std::size_t utf8_length(std::string_view s);

// Lowercase, trim, strip leading/trailing punctuation, collapse inner whitespace.
std::string normalize_token(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Stable 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

std::string iso8601_now();

}  // namespace genderprobe::text
