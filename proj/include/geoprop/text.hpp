#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace geoprop::text {

/// Unicode NFC of UTF-8 input. Invalid UTF-8 is returned unchanged.
std::string nfc(std::string_view utf8);

/// Strips leading and trailing ASCII whitespace (space, \t, \n, \v, \f, \r).
std::string_view trim_ascii(std::string_view s);

/// The comparison key for exact place-name matching: trimmed, then NFC.
std::string match_key(std::string_view s);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t scalar_count(std::string_view utf8);

/// Undoes the "\t", "\n" and "\\" escapes used in free-text TSV columns.
std::string unescape_field(std::string_view s);
std::string escape_field(std::string_view s);

}  // namespace geoprop::text
