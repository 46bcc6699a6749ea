#include "simpdom/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>

#include "simpdom/errors.hpp"
#include "simpdom/text.hpp"

namespace simpdom {

const TagPolicy& TagPolicy::standard() {
  static const TagPolicy policy{
      {"b", "i", "em", "strong", "small", "mark", "sub", "sup", "ins", "del",
       "u", "s", "font", "center", "big", "tt", "abbr", "cite", "code", "kbd",
       "samp", "var"},
      {"script", "style", "noscript", "template"},
  };
  return policy;
}

bool is_void_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 15> kVoid = {
      "area", "base", "br",   "col",   "embed",  "hr",    "img",   "input",
      "link", "meta", "param", "source", "track", "wbr", "keygen"};
  return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

namespace {

bool one_of(std::string_view tag, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), tag) != set.end();
}

bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
         c == ':' || c == '.';
}

struct RawItem {
  int child = -1;  // element index, or -1 for a text fragment
  std::string text;
};

struct RawElement {
  std::string tag;
  std::vector<RawItem> items;
};

// Builds the unfiltered element tree with a handful of implied-end-tag
// rules (p, li, dt/dd, table cells and rows, option, a).
class RawTreeBuilder {
 public:
  RawTreeBuilder() {
    elements_.push_back({"html", {}});
    stack_.push_back(0);
  }

  std::vector<RawElement> take() { return std::move(elements_); }

  void text(std::string_view raw) {
    if (raw.empty()) return;
    auto& items = elements_[stack_.back()].items;
    if (!items.empty() && items.back().child < 0) {
      items.back().text.append(raw);
    } else {
      items.push_back({-1, std::string(raw)});
    }
  }

  void start(const std::string& tag, bool self_closing) {
    if (tag == "html") return;
    apply_implied_ends(tag);
    int idx = static_cast<int>(elements_.size());
    elements_.push_back({tag, {}});
    elements_[stack_.back()].items.push_back({idx, {}});
    if (!self_closing && !is_void_element(tag)) stack_.push_back(idx);
  }

  void end(const std::string& tag) {
    if (tag == "html") return;
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (elements_[stack_[i]].tag == tag) {
        stack_.resize(i);
        return;
      }
    }
  }

 private:
  // Pops through the nearest open element in `targets`, searching down the
  // stack but not past any element in `boundaries`.
  void close_nearest(std::initializer_list<std::string_view> targets,
                     std::initializer_list<std::string_view> boundaries) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const auto& t = elements_[stack_[i]].tag;
      if (one_of(t, targets)) {
        stack_.resize(i);
        return;
      }
      if (one_of(t, boundaries)) return;
    }
  }

  void apply_implied_ends(std::string_view tag) {
    if (one_of(tag, {"address", "article", "aside", "blockquote", "div", "dl",
                     "fieldset", "footer", "form", "h1", "h2", "h3", "h4",
                     "h5", "h6", "header", "hr", "main", "nav", "ol", "p",
                     "pre", "section", "table", "ul", "li", "dd", "dt",
                     "figure", "figcaption", "details", "summary", "menu"})) {
      close_nearest({"p"}, {"table", "td", "th", "caption", "button", "object", "marquee"});
    }
    if (tag == "li") {
      close_nearest({"li"}, {"ul", "ol", "table", "td", "th"});
    } else if (tag == "dt" || tag == "dd") {
      close_nearest({"dt", "dd"}, {"dl", "table", "td", "th"});
    } else if (tag == "td" || tag == "th") {
      close_nearest({"td", "th"}, {"tr", "table"});
    } else if (tag == "tr") {
      close_nearest({"tr"}, {"table", "tbody", "thead", "tfoot"});
    } else if (tag == "tbody" || tag == "thead" || tag == "tfoot") {
      close_nearest({"tbody", "thead", "tfoot"}, {"table"});
    } else if (tag == "option") {
      close_nearest({"option"}, {"select", "datalist", "optgroup"});
    } else if (tag == "a") {
      close_nearest({"a"}, {"table", "td", "th", "caption", "button", "object", "marquee"});
    } else if (tag == "body") {
      close_nearest({"head"}, {});
    }
  }

  std::vector<RawElement> elements_;
  std::vector<int> stack_;
};

std::size_t find_ci(std::string_view hay, std::string_view needle,
                    std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size() && match; ++j) {
      match = std::tolower(static_cast<unsigned char>(hay[i + j])) ==
              static_cast<unsigned char>(needle[j]);
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// Returns the offset just past the '>' that ends a tag starting at `pos`,
// honoring quoted attribute values. Sets `self_closing` when the tag ends
// with "/>".
std::size_t skip_tag(std::string_view s, std::size_t pos, bool& self_closing) {
  char quote = 0;
  self_closing = false;
  for (std::size_t i = pos; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') {
      // Quotes only open an attribute value after '='.
      std::size_t j = i;
      while (j > pos && (s[j - 1] == ' ' || s[j - 1] == '\t' ||
                         s[j - 1] == '\n' || s[j - 1] == '\r')) {
        --j;
      }
      if (j > pos && s[j - 1] == '=') quote = c;
      continue;
    }
    if (c == '>') {
      self_closing = i > pos && s[i - 1] == '/';
      return i + 1;
    }
  }
  return s.size();
}

std::vector<RawElement> tokenize(std::string_view s, const TagPolicy& policy) {
  RawTreeBuilder builder;
  std::size_t i = 0;
  std::size_t text_start = 0;
  auto flush_text = [&](std::size_t end) {
    if (end > text_start) builder.text(s.substr(text_start, end - text_start));
  };
  while (i < s.size()) {
    if (s[i] != '<' || i + 1 >= s.size()) {
      ++i;
      continue;
    }
    char next = s[i + 1];
    if (s.compare(i, 4, "<!--") == 0) {
      flush_text(i);
      std::size_t close = s.find("-->", i + 4);
      i = close == std::string_view::npos ? s.size() : close + 3;
      text_start = i;
    } else if (next == '!' || next == '?' ||
               (next == '/' && (i + 2 >= s.size() || !is_name_start(s[i + 2])))) {
      flush_text(i);
      std::size_t close = s.find('>', i + 2);
      i = close == std::string_view::npos ? s.size() : close + 1;
      text_start = i;
    } else if (next == '/' || is_name_start(next)) {
      flush_text(i);
      bool closing = next == '/';
      std::size_t name_begin = i + (closing ? 2 : 1);
      std::size_t name_end = name_begin;
      while (name_end < s.size() && is_name_char(s[name_end])) ++name_end;
      std::string tag = ascii_lower(s.substr(name_begin, name_end - name_begin));
      bool self_closing = false;
      i = skip_tag(s, name_end, self_closing);
      text_start = i;
      if (closing) {
        builder.end(tag);
        continue;
      }
      bool raw_text = policy.is_dropped(tag) || tag == "title" ||
                      tag == "textarea";
      if (raw_text && !self_closing) {
        std::string needle = "</" + tag;
        std::size_t close = find_ci(s, needle, i);
        std::size_t content_end = close == std::string_view::npos ? s.size() : close;
        builder.start(tag, false);
        if (!policy.is_dropped(tag)) builder.text(s.substr(i, content_end - i));
        builder.end(tag);
        if (close == std::string_view::npos) {
          i = s.size();
        } else {
          bool ignored = false;
          i = skip_tag(s, close + needle.size(), ignored);
        }
        text_start = i;
      } else {
        builder.start(tag, self_closing);
      }
    } else {
      ++i;
    }
  }
  flush_text(s.size());
  return builder.take();
}

// One entry of a kept element's flattened content: a merged text run or a
// kept element child. Formatting tags are spliced out before this point.
struct Run {
  std::string text;
  int child = -1;
};

class TreeAssembler {
 public:
  TreeAssembler(const std::vector<RawElement>& raw, const TagPolicy& policy)
      : raw_(raw), policy_(policy) {}

  std::vector<DomNode> assemble() {
    emit(0, std::nullopt);
    return std::move(nodes_);
  }

 private:
  void collect(int element, std::vector<Run>& runs,
               std::vector<std::string>& pending) {
    for (const auto& item : raw_[element].items) {
      if (item.child < 0) {
        auto norm = normalize_text(item.text);
        if (!norm.empty()) pending.push_back(std::move(norm));
        continue;
      }
      const auto& tag = raw_[item.child].tag;
      if (policy_.is_dropped(tag)) continue;
      if (policy_.is_formatting(tag)) {
        collect(item.child, runs, pending);
        continue;
      }
      flush(runs, pending);
      runs.push_back({{}, item.child});
    }
  }

  static void flush(std::vector<Run>& runs,
                    std::vector<std::string>& pending) {
    if (pending.empty()) return;
    std::string joined;
    for (const auto& p : pending) {
      if (!joined.empty()) joined.push_back(' ');
      joined += p;
    }
    pending.clear();
    runs.push_back({std::move(joined), -1});
  }

  int emit(int element, std::optional<int> parent) {
    int id = static_cast<int>(nodes_.size());
    DomNode node;
    node.id = id;
    node.parent_id = parent;
    node.tag = raw_[element].tag;
    nodes_.push_back(std::move(node));

    std::vector<Run> runs;
    std::vector<std::string> pending;
    collect(element, runs, pending);
    flush(runs, pending);

    bool has_children = std::any_of(runs.begin(), runs.end(),
                                    [](const auto& r) { return r.child >= 0; });
    if (!has_children) {
      if (!runs.empty()) nodes_[id].text = std::move(runs.front().text);
      return id;
    }
    for (auto& run : runs) {
      int child;
      if (run.child >= 0) {
        child = emit(run.child, id);
      } else {
        child = static_cast<int>(nodes_.size());
        DomNode t;
        t.id = child;
        t.parent_id = id;
        t.tag = "#text";
        t.text = std::move(run.text);
        nodes_.push_back(std::move(t));
      }
      nodes_[id].child_ids.push_back(child);
    }
    return id;
  }

  const std::vector<RawElement>& raw_;
  const TagPolicy& policy_;
  std::vector<DomNode> nodes_;
};

}  // namespace

DomTree parse_page(std::string_view html, const std::string& page_id,
                   const TagPolicy& policy) {
  if (collapse_whitespace(html).empty()) {
    throw EmptyDocumentError("empty document '" + page_id + "'");
  }
  if (auto bad = find_invalid_utf8(html); bad != std::string_view::npos) {
    throw ParseError("invalid UTF-8 in page '" + page_id + "'", bad);
  }
  auto raw = tokenize(html, policy);
  TreeAssembler assembler(raw, policy);
  return DomTree::build(page_id, assembler.assemble());
}

std::string serialize_html(const DomTree& tree) {
  std::string out;
  std::function<void(int)> write = [&](int id) {
    const auto& n = tree.node(id);
    if (n.tag == "#text") {
      out += escape_html(n.text.value_or(""));
      return;
    }
    out += "<" + n.tag + ">";
    if (n.child_ids.empty() && !n.text && is_void_element(n.tag)) return;
    if (n.text) out += escape_html(*n.text);
    for (int c : n.child_ids) write(c);
    out += "</" + n.tag + ">";
  };
  write(tree.root_id());
  return out;
}

}  // namespace simpdom
