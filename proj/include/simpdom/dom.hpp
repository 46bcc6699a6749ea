#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simpdom {

// Text leaves are either variable (differ across a site's pages) or fixed
// (constant labels such as "by"). Element nodes without text are non-text.
enum class NodeClass { kVariable, kFixed, kNonText };

std::string_view to_string(NodeClass c);

struct DomNode {
  int id = 0;
  std::optional<int> parent_id;
  std::string tag;                  // lowercase; "#text" for split text runs
  std::optional<std::string> text;  // normalized; present iff text leaf
  std::vector<int> child_ids;
  int dfs_position = 0;             // 1-based pre-order position
  std::string indexed_xpath;        // "/html[1]/body[1]/div[2]"
  NodeClass node_class = NodeClass::kNonText;

  bool is_text_leaf() const { return text.has_value(); }
};

// An immutable page tree. Node ids are dense: node(i).id == i.
class DomTree {
 public:
  DomTree() = default;

  // Validates parent/child links, rejects cycles and multiple roots, then
  // assigns dfs positions, indexed xpaths and default node classes
  // (text leaves variable, everything else non-text).
  static DomTree build(std::string page_id, std::vector<DomNode> nodes);

  const std::string& page_id() const { return page_id_; }
  int root_id() const { return root_id_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const DomNode> nodes() const { return nodes_; }
  const DomNode& node(int id) const;
  bool contains(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
  }

  int depth(int id) const;
  std::optional<int> find_by_xpath(std::string_view xpath) const;

  // Text leaves in dfs order, and each leaf's 1-based rank in that order
  // (0 for nodes that carry no text).
  const std::vector<int>& text_leaves() const { return text_leaves_; }
  int text_leaf_rank(int id) const { return leaf_rank_.at(node(id).id); }
  std::vector<int> variable_nodes() const;

  // Re-labels text leaves as variable/fixed. Non-text nodes must stay
  // kNonText and text leaves may not become kNonText.
  void set_node_classes(std::span<const NodeClass> classes);

 private:
  std::string page_id_;
  std::vector<DomNode> nodes_;
  int root_id_ = 0;
  std::vector<int> text_leaves_;
  std::vector<int> leaf_rank_;
  std::unordered_map<std::string, int> by_xpath_;
};

// Tags from the root down to `node` inclusive, indices stripped.
std::vector<std::string> tag_path(const DomNode& node, const DomTree& tree);

// Up to k ancestor ids, nearest first; the root is the last one reachable.
std::vector<int> ancestors(const DomNode& node, const DomTree& tree, int k);

// Pre-order traversal, children in document order. Throws StructuralError
// when the parent/child links contain a cycle or unreachable nodes.
std::vector<int> dfs_order(const DomTree& tree);

}  // namespace simpdom
