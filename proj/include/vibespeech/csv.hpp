#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vibespeech {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict decimal parse of the whole field; throws ParseError with `context`.
double parse_double(std::string_view field, std::string_view context);

/// Splits on commas. No quoting support: fields never contain commas.
std::vector<std::string_view> split_fields(std::string_view line);

std::string_view trim(std::string_view s);

/// Reads all lines, stripping a trailing '\r'. Throws IoError on open failure.
std::vector<std::string> read_lines(const std::string& path);

/// Writes `content` to `path` atomically enough for our purposes (truncate + write).
void write_text_file(const std::string& path, const std::string& content);

/// 64-bit FNV-1a, used for config and fold-assignment fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t v);

}  // namespace vibespeech
