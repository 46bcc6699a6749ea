#include "doctest.h"

#include <algorithm>
#include <fstream>

#include "simpdom/errors.hpp"
#include "simpdom/html.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/synth.hpp"
#include "support.hpp"

using namespace simpdom;
namespace fs = std::filesystem;

namespace {

std::string page_html(const std::string& title, const std::string& author) {
  return "<html><body><h1>" + title + "</h1><div><span>by</span><a>" + author +
         "</a></div></body></html>";
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

NodeClass class_at(const DomTree& tree, const std::string& text) {
  for (int id : tree.text_leaves()) {
    if (*tree.node(id).text == text) return tree.node(id).node_class;
  }
  FAIL("no leaf with text " << text);
  return NodeClass::kNonText;
}

}  // namespace

TEST_CASE("fixed and variable leaves across a site") {
  std::vector<DomTree> pages{parse_page(page_html("A", "X"), "1"),
                             parse_page(page_html("B", "Y"), "2"),
                             parse_page(page_html("C", "Z"), "3")};
  auto classes = classify_variable_nodes(pages);
  for (std::size_t i = 0; i < pages.size(); ++i) pages[i].set_node_classes(classes[i]);
  CHECK(class_at(pages[0], "by") == NodeClass::kFixed);
  CHECK(class_at(pages[0], "A") == NodeClass::kVariable);
  CHECK(class_at(pages[2], "Z") == NodeClass::kVariable);

  std::vector<DomTree> single{parse_page(page_html("A", "X"), "1")};
  const auto single_classes = classify_variable_nodes(single);
  for (auto c : single_classes[0]) CHECK(c != NodeClass::kFixed);

  CHECK_THROWS_AS(classify_variable_nodes(std::span<const DomTree>{}), ArgumentError);
}

TEST_CASE("classification does not depend on page order") {
  auto raw = synth_book({1, 8, 3});
  std::vector<DomTree> pages;
  for (const auto& p : raw.sites[0].pages) pages.push_back(parse_page(p.html, p.page_id));
  auto forward = classify_variable_nodes(pages);
  std::vector<DomTree> reversed(pages.rbegin(), pages.rend());
  auto backward = classify_variable_nodes(reversed);
  std::reverse(backward.begin(), backward.end());
  CHECK(forward == backward);
}

TEST_CASE("gold alignment") {
  const std::vector<std::string> attrs{"title", "author"};
  std::vector<DomTree> pages{parse_page(page_html("Same", "Same"), "1"),
                             parse_page(page_html("T2", "J. K. Rowling"), "2")};
  auto classes = classify_variable_nodes(pages);
  for (std::size_t i = 0; i < pages.size(); ++i) pages[i].set_node_classes(classes[i]);

  auto ok = align_gold_labels(pages[1], {{"author", {"J. K. Rowling"}}}, attrs);
  CHECK(ok.warnings.empty());
  int authors = 0, nones = 0;
  for (const auto& l : ok.labels) {
    if (l.label == 1) {
      ++authors;
      CHECK(*pages[1].node(l.node_id).text == "J. K. Rowling");
    }
    if (l.label == 2) ++nones;
  }
  CHECK(authors == 1);
  CHECK(nones == static_cast<int>(ok.labels.size()) - 1);

  // Both attributes share a value: lowest index wins, with a warning.
  auto collide = align_gold_labels(pages[0], {{"author", {"Same"}}, {"title", {"Same"}}}, attrs);
  CHECK(collide.warnings.size() == 2);
  for (const auto& l : collide.labels) CHECK(l.label == 0);

  CHECK_THROWS_AS(align_gold_labels(pages[0], {{"price", {"1"}}}, attrs), SchemaError);
}

TEST_CASE("labels stay within range and aligner recall is complete") {
  auto raw = synth_book({2, 6, 9});
  for (const auto& site : build_vertical(raw)) {
    for (const auto& page : site.pages) {
      int labelled = 0;
      for (const auto& l : page.labels) {
        REQUIRE(l.label >= 0);
        REQUIRE(l.label <= site.num_attributes());
        if (l.label < site.num_attributes()) ++labelled;
      }
      int gold_values = 0;
      for (const auto& [name, values] : page.gold) gold_values += static_cast<int>(!values.empty());
      CHECK(labelled >= gold_values);
      for (const auto& [name, values] : page.gold) {
        const auto index = std::find(site.attributes.begin(), site.attributes.end(), name) -
                           site.attributes.begin();
        CHECK(std::any_of(page.labels.begin(), page.labels.end(),
                          [&](const NodeLabel& l) { return l.label == index; }));
      }
    }
  }
}

TEST_CASE("loading a corpus from disk") {
  testing::TempDir dir("ingest");
  const auto root = dir.path();
  write(root / "book" / "attributes.txt", "title\nauthor\n");
  write(root / "book" / "s1" / "pages" / "0002.htm", page_html("B", "Y"));
  write(root / "book" / "s1" / "pages" / "0001.htm", page_html("A", "X"));
  write(root / "book" / "s1" / "groundtruth.jsonl",
        "{\"page\": \"0001\", \"attributes\": {\"title\": [\"A\"]}}\n"
        "{\"page\": \"0002\", \"attributes\": {\"author\": [\"Y\"]}}\n");

  CHECK(list_verticals(root) == std::vector<std::string>{"book"});
  CHECK(list_sites(root, "book") == std::vector<std::string>{"s1"});
  auto sites = load_vertical(root, "book");
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].pages.size() == 2);
  CHECK(sites[0].pages[0].page_id == "0001");
  CHECK(sites[0].attributes == std::vector<std::string>{"title", "author"});

  SUBCASE("malformed ground truth names the line") {
    write(root / "book" / "s1" / "groundtruth.jsonl",
          "{\"page\": \"0001\", \"attributes\": {}}\n{oops\n");
    try {
      load_vertical(root, "book");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("missing ground truth is an I/O error naming the site") {
    fs::remove(root / "book" / "s1" / "groundtruth.jsonl");
    try {
      load_vertical(root, "book");
      FAIL("expected an I/O error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("s1") != std::string::npos);
    }
  }
  SUBCASE("unknown gold attribute") {
    write(root / "book" / "s1" / "groundtruth.jsonl",
          "{\"page\": \"0001\", \"attributes\": {\"isbn\": [\"1\"]}}\n");
    CHECK_THROWS_AS(load_vertical(root, "book"), SchemaError);
  }
  CHECK_THROWS_AS(load_vertical(root / "nowhere", "book"), IoError);
}

TEST_CASE("parallel loading matches sequential loading") {
  testing::TempDir dir("ingest-par");
  write_vertical(dir.path(), synth_book({4, 5, 2}));
  auto seq = load_vertical(dir.path(), "book", 1);
  auto par = load_vertical(dir.path(), "book", 3);
  REQUIRE(seq.size() == par.size());
  for (std::size_t s = 0; s < seq.size(); ++s) {
    CHECK(seq[s].site_id == par[s].site_id);
    REQUIRE(seq[s].pages.size() == par[s].pages.size());
    for (std::size_t p = 0; p < seq[s].pages.size(); ++p) {
      CHECK(serialize_html(seq[s].pages[p].tree) == serialize_html(par[s].pages[p].tree));
      CHECK(seq[s].pages[p].gold == par[s].pages[p].gold);
    }
  }
}
