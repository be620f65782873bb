#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace goldfish::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Runs of ASCII whitespace become one space; leading/trailing whitespace is dropped.
std::string collapse_whitespace(std::string_view s);

/// Removes `<...>` markup and `{\...}` override blocks.
std::string strip_markup(std::string_view s);

bool contains_icase(std::string_view haystack, std::string_view needle);
bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);

/// Lower-cased word tokens: maximal runs of alphanumerics, '-' and '_'.
std::vector<std::string> tokenize(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

/// "HH:MM:SS<sep>mmm"
std::string format_timestamp(std::int64_t ms, char millis_separator);

std::string join(std::span<const std::string> parts, std::string_view sep);

}  // namespace goldfish::text
