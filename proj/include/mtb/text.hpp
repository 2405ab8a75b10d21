#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 aware text utilities shared by prompts, mocks and metrics.
namespace mtb::text {

// Decodes UTF-8 into code points. Invalid bytes map to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Whitespace as understood by Python's str.split() with no arguments.
bool is_space(char32_t c) noexcept;
// ASCII punctuation (Python's string.punctuation).
bool is_ascii_punct(char32_t c) noexcept;

// Splits on runs of whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::u32string> split_whitespace(std::u32string_view s);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::string to_upper_ascii(std::string_view s);

// Strips leading and trailing ASCII punctuation from a token.
std::string strip_punct(std::string_view token);

std::size_t word_count(std::string_view s);

// Counts non-overlapping occurrences of needle.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// printf-style "%.Nf" rendering (correctly rounded from the binary value).
std::string fixed(double value, int decimals);
// Decimal half-up rounding for reports: 40.175 -> "40.18".
std::string round_half_up(double value, int decimals);
// Shortest representation that round-trips exactly.
std::string exact(double value);

}  // namespace mtb::text
