#include "simpdom/text.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>

namespace simpdom {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) || cp == 0) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string_view, std::uint32_t> table = {
      {"amp", '&'},      {"lt", '<'},        {"gt", '>'},
      {"quot", '"'},     {"apos", '\''},     {"nbsp", ' '},
      {"copy", 0xA9},    {"reg", 0xAE},      {"trade", 0x2122},
      {"mdash", 0x2014}, {"ndash", 0x2013},  {"hellip", 0x2026},
      {"lsquo", 0x2018}, {"rsquo", 0x2019},  {"ldquo", 0x201C},
      {"rdquo", 0x201D}, {"laquo", 0xAB},    {"raquo", 0xBB},
      {"middot", 0xB7},  {"bull", 0x2022},   {"deg", 0xB0},
      {"pound", 0xA3},   {"euro", 0x20AC},   {"yen", 0xA5},
      {"cent", 0xA2},    {"sect", 0xA7},     {"para", 0xB6},
      {"times", 0xD7},   {"divide", 0xF7},   {"frac12", 0xBD},
      {"frac14", 0xBC},  {"frac34", 0xBE},   {"eacute", 0xE9},
      {"egrave", 0xE8},  {"aacute", 0xE1},   {"agrave", 0xE0},
      {"iacute", 0xED},  {"oacute", 0xF3},   {"uacute", 0xFA},
      {"ntilde", 0xF1},  {"ouml", 0xF6},     {"uuml", 0xFC},
      {"auml", 0xE4},    {"ccedil", 0xE7},   {"szlig", 0xDF},
  };
  return table;
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_nbsp_at(std::string_view s, std::size_t i) {
  return i + 1 < s.size() && static_cast<unsigned char>(s[i]) == 0xC2 &&
         static_cast<unsigned char>(s[i + 1]) == 0xA0;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 0;
}

}  // namespace

std::string decode_entities(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out.push_back(raw[i]);
      continue;
    }
    std::size_t semi = raw.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back('&');
      continue;
    }
    std::string_view body = raw.substr(i + 1, semi - i - 1);
    bool ok = false;
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      std::size_t start = hex ? 2 : 1;
      ok = body.size() > start;
      for (std::size_t j = start; ok && j < body.size(); ++j) {
        char c = body[j];
        int digit = -1;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        if (digit < 0) ok = false;
        else cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
        if (cp > 0x10FFFF) cp = 0x110000;
      }
      if (ok) append_utf8(out, cp == 0xA0 ? ' ' : cp);
    } else {
      auto it = named_entities().find(body);
      if (it != named_entities().end()) {
        ok = true;
        append_utf8(out, it->second);
      }
    }
    if (ok) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool space = is_space(static_cast<unsigned char>(s[i]));
    if (!space && is_nbsp_at(s, i)) {
      space = true;
      ++i;
    }
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(s[i]);
  }
  return out;
}

std::string normalize_text(std::string_view raw) {
  return collapse_whitespace(decode_entities(raw));
}

std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) words.emplace_back(s.substr(start, i - start));
  }
  return words;
}

std::string truncate_text(std::string_view text, std::size_t max_words) {
  auto words = split_words(text);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < max_words; ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = utf8_length(static_cast<unsigned char>(s[i]));
    if (len == 0 || i + len > s.size()) len = 1;
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = utf8_length(lead);
    if (len == 0 || i + len > s.size()) return i;
    std::uint32_t cp = len == 1 ? lead : (lead & (0x7F >> len));
    for (std::size_t j = 1; j < len; ++j) {
      auto c = static_cast<unsigned char>(s[i + j]);
      if ((c & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (c & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return i;
    }
    i += len;
  }
  return std::string_view::npos;
}

}  // namespace simpdom
