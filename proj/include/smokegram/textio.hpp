#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace smokegram::textio {

// Shortest decimal form that parses back to the identical double.
// Used for every float this tool writes, so artifacts are byte-reproducible.
std::string format_double(double v);

// Strict parse of a full token; throws ParseError on trailing garbage.
double parse_double(std::string_view s, const std::string& context);
long long parse_int(std::string_view s, const std::string& context);
std::uint64_t parse_uint64(std::string_view s, const std::string& context);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// FNV-1a 64-bit, used for file checksums and seed derivation.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

std::string to_hex(std::uint64_t v);

} // namespace smokegram::textio
