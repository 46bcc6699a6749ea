#pragma once

#include <set>
#include <string>
#include <string_view>

#include "simpdom/dom.hpp"

namespace simpdom {

// Version of the pinned formatting-tag table below. Bump whenever the list
// changes; cached preprocessing keys on it.
inline constexpr int kTagTableVersion = 1;

// Which tags are spliced out (text hoisted into the nearest kept ancestor)
// and which are dropped together with their content.
struct TagPolicy {
  std::set<std::string, std::less<>> formatting;
  std::set<std::string, std::less<>> dropped;

  static const TagPolicy& standard();
  bool is_formatting(std::string_view tag) const { return formatting.contains(tag); }
  bool is_dropped(std::string_view tag) const { return dropped.contains(tag); }
};

// Lenient HTML parse into a filtered tree rooted at <html>. Missing <html>
// is synthesized; stray end tags are ignored; unclosed elements close at EOF.
//
// Throws EmptyDocumentError for blank input and ParseError (with the byte
// offset) for bytes that are not valid UTF-8.
DomTree parse_page(std::string_view html, const std::string& page_id,
                   const TagPolicy& policy = TagPolicy::standard());

// Re-emits the kept skeleton as HTML. parse_page on the result reproduces
// the same tree.
std::string serialize_html(const DomTree& tree);

bool is_void_element(std::string_view tag);

}  // namespace simpdom
