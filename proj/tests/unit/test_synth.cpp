#include "doctest.h"

#include <set>

#include "simpdom/errors.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/synth.hpp"
#include "support.hpp"

using namespace simpdom;

TEST_CASE("book vertical shape") {
  auto raw = synth_book({2, 20, 0});
  CHECK(raw.name == "book");
  CHECK(raw.attributes == std::vector<std::string>{"title", "author", "isbn"});
  REQUIRE(raw.sites.size() == 2);
  CHECK(raw.sites[0].site_id != raw.sites[1].site_id);
  for (const auto& site : raw.sites) CHECK(site.pages.size() == 20);
  CHECK(synth_album().attributes.size() == 4);
  CHECK(synth_vertical("album").name == "album");
  CHECK_THROWS(synth_vertical("movie"));
}

TEST_CASE("generation is deterministic in the seed") {
  auto a = synth_book({2, 5, 9});
  auto b = synth_book({2, 5, 9});
  auto c = synth_book({2, 5, 10});
  CHECK(a.sites[1].pages[3].html == b.sites[1].pages[3].html);
  CHECK(a.sites[1].pages[3].html != c.sites[1].pages[3].html);
}

TEST_CASE("labels sit next to fixed cue words") {
  auto sites = build_vertical(synth_book({2, 20, 1}));
  for (const auto& site : sites) {
    std::set<std::string> fixed;
    for (const auto& page : site.pages) {
      for (int id : page.tree.text_leaves()) {
        if (page.tree.node(id).node_class == NodeClass::kFixed) fixed.insert(*page.tree.node(id).text);
      }
      // Every attribute is labelled on every page.
      std::set<int> labels;
      for (const auto& l : page.labels) labels.insert(l.label);
      for (int a = 0; a < site.num_attributes(); ++a) CHECK(labels.count(a) == 1);
      CHECK(site.warnings.empty());
    }
    CHECK(fixed.count("by") == 1);
    CHECK(fixed.count("ISBN:") == 1);
  }
  // The two template families differ in markup.
  CHECK(sites[0].pages[0].tree.node(sites[0].pages[0].tree.text_leaves()[3]).indexed_xpath !=
        sites[1].pages[0].tree.node(sites[1].pages[0].tree.text_leaves()[3]).indexed_xpath);
}

TEST_CASE("written corpora load back unchanged") {
  testing::TempDir dir("synth");
  auto raw = synth_album({2, 4, 3});
  write_vertical(dir.path(), raw);
  auto loaded = load_vertical(dir.path(), "album");
  auto direct = build_vertical(raw);
  REQUIRE(loaded.size() == direct.size());
  for (std::size_t s = 0; s < loaded.size(); ++s) {
    CHECK(loaded[s].site_id == direct[s].site_id);
    CHECK(loaded[s].attributes == direct[s].attributes);
    REQUIRE(loaded[s].pages.size() == direct[s].pages.size());
    for (std::size_t p = 0; p < loaded[s].pages.size(); ++p) {
      const auto& a = loaded[s].pages[p];
      const auto& b = direct[s].pages[p];
      CHECK(a.page_id == b.page_id);
      CHECK(a.gold == b.gold);
      REQUIRE(a.labels.size() == b.labels.size());
      for (std::size_t i = 0; i < a.labels.size(); ++i) CHECK(a.labels[i].label == b.labels[i].label);
    }
  }
}
