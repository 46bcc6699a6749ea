#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace simpdom {

// Decodes named (common subset) and numeric character references. Unknown
// references are kept verbatim. &nbsp; becomes a plain space.
std::string decode_entities(std::string_view raw);

// Collapses whitespace runs to one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

// decode_entities followed by collapse_whitespace.
std::string normalize_text(std::string_view raw);

// Escapes &, < and > for re-serialization.
std::string escape_html(std::string_view s);

std::vector<std::string> split_words(std::string_view s);

// First `max_words` whitespace-delimited words, joined by single spaces.
std::string truncate_text(std::string_view text, std::size_t max_words = 15);

// ASCII lowercase; bytes >= 0x80 are left untouched.
std::string ascii_lower(std::string_view s);

// Splits a UTF-8 string into code-point substrings. Invalid sequences are
// emitted byte by byte.
std::vector<std::string> utf8_chars(std::string_view s);

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s);

}  // namespace simpdom
