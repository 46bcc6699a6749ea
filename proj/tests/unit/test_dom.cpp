#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "simpdom/dom.hpp"
#include "simpdom/errors.hpp"
#include "support.hpp"

using namespace simpdom;

namespace {

DomNode element(int id, std::optional<int> parent, std::string tag, std::vector<int> children) {
  DomNode n;
  n.id = id;
  n.parent_id = parent;
  n.tag = std::move(tag);
  n.child_ids = std::move(children);
  return n;
}

DomNode leaf(int id, int parent, std::string tag, std::string text) {
  DomNode n = element(id, parent, std::move(tag), {});
  n.text = std::move(text);
  return n;
}

// html > body > (tr, tr, tr > (td, td))
DomTree table_tree() {
  std::vector<DomNode> nodes{
      element(0, std::nullopt, "html", {1}),
      element(1, 0, "body", {2, 3, 4}),
      leaf(2, 1, "tr", "r1"),
      leaf(3, 1, "tr", "r2"),
      element(4, 1, "tr", {5, 6}),
      leaf(5, 4, "td", "by"),
      leaf(6, 4, "td", "J. K. Rowling"),
  };
  return DomTree::build("p", std::move(nodes));
}

DomTree chain(int length) {
  std::vector<DomNode> nodes;
  for (int i = 0; i < length; ++i) {
    nodes.push_back(element(i, i == 0 ? std::nullopt : std::optional<int>(i - 1), "div",
                            i + 1 < length ? std::vector<int>{i + 1} : std::vector<int>{}));
  }
  return DomTree::build("chain", std::move(nodes));
}

}  // namespace

TEST_CASE("indexed xpaths and tag paths") {
  auto tree = table_tree();
  CHECK(tree.node(6).indexed_xpath == "/html[1]/body[1]/tr[3]/td[2]");
  CHECK(tag_path(tree.node(6), tree) == std::vector<std::string>{"html", "body", "tr", "td"});
  CHECK(tag_path(tree.node(0), tree) == std::vector<std::string>{"html"});
  CHECK(tree.find_by_xpath("/html[1]/body[1]/tr[3]/td[1]") == 5);
  CHECK_FALSE(tree.find_by_xpath("/html[1]/body[1]/tr[9]"));
  CHECK_THROWS_AS(tree.node(99), LookupError);

  auto deep = chain(10);
  CHECK(tag_path(deep.node(9), deep).size() == 10);
  CHECK(deep.depth(9) == 9);
}

TEST_CASE("ancestors are nearest first and bounded") {
  auto tree = table_tree();
  CHECK(ancestors(tree.node(6), tree, 5) == std::vector<int>{4, 1, 0});
  CHECK(ancestors(tree.node(0), tree, 5).empty());
  auto deep = chain(8);
  CHECK(ancestors(deep.node(7), deep, 3) == std::vector<int>{6, 5, 4});
}

TEST_CASE("dfs order is pre-order") {
  std::vector<DomNode> nodes{element(0, std::nullopt, "html", {1, 3}), element(1, 0, "div", {2}),
                             leaf(2, 1, "p", "c"), leaf(3, 0, "p", "b")};
  auto tree = DomTree::build("t", std::move(nodes));
  CHECK(dfs_order(tree) == std::vector<int>{0, 1, 2, 3});
  CHECK(tree.node(3).dfs_position == 4);

  std::vector<DomNode> single{element(0, std::nullopt, "html", {})};
  CHECK(dfs_order(DomTree::build("s", std::move(single))) == std::vector<int>{0});
}

TEST_CASE("malformed link structures are rejected") {
  std::vector<DomNode> cyc{element(0, std::nullopt, "html", {1}), element(1, 0, "div", {2}),
                           element(2, 1, "div", {1})};
  CHECK_THROWS_AS(DomTree::build("c", std::move(cyc)), StructuralError);

  std::vector<DomNode> two_roots{element(0, std::nullopt, "html", {}),
                                 element(1, std::nullopt, "html", {})};
  CHECK_THROWS_AS(DomTree::build("r", std::move(two_roots)), StructuralError);
}

TEST_CASE("node classes must respect text presence") {
  auto tree = table_tree();
  std::vector<NodeClass> bad(tree.size(), NodeClass::kNonText);
  CHECK_THROWS(tree.set_node_classes(bad));
}

TEST_CASE("random trees keep the structural invariants") {
  nn::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto tree = testing::random_tree(rng, 30);
    std::vector<int> positions;
    for (const auto& n : tree.nodes()) positions.push_back(n.dfs_position);
    std::sort(positions.begin(), positions.end());
    std::vector<int> expected(tree.size());
    std::iota(expected.begin(), expected.end(), 1);
    REQUIRE(positions == expected);

    std::set<std::string> xpaths;
    for (const auto& n : tree.nodes()) {
      xpaths.insert(n.indexed_xpath);
      auto path = tag_path(n, tree);
      REQUIRE(static_cast<int>(path.size()) == tree.depth(n.id) + 1);
      if (n.parent_id) {
        auto parent_path = tag_path(tree.node(*n.parent_id), tree);
        REQUIRE(std::equal(parent_path.begin(), parent_path.end(), path.begin()));
      }
      auto anc = ancestors(n, tree, 1000);
      std::reverse(anc.begin(), anc.end());
      auto chain_ids = testing::root_path(tree, n.id);
      chain_ids.pop_back();
      REQUIRE(anc == chain_ids);
    }
    REQUIRE(xpaths.size() == tree.size());
  }
}
