#include "simpdom/dom.hpp"

#include "simpdom/errors.hpp"

namespace simpdom {

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::kVariable:
      return "variable";
    case NodeClass::kFixed:
      return "fixed";
    case NodeClass::kNonText:
      return "non-text";
  }
  return "non-text";
}

namespace {

std::string xpath_segment(const std::string& tag) {
  return tag == "#text" ? std::string("text()") : tag;
}

// Pre-order walk over raw nodes; every node must be reached exactly once.
std::vector<int> walk(std::span<const DomNode> nodes, int root) {
  std::vector<int> order;
  order.reserve(nodes.size());
  std::vector<char> seen(nodes.size(), 0);
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (seen[id]) {
      throw StructuralError("cycle detected at node " + std::to_string(id));
    }
    seen[id] = 1;
    order.push_back(id);
    const auto& kids = nodes[id].child_ids;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (*it < 0 || static_cast<std::size_t>(*it) >= nodes.size()) {
        throw StructuralError("child id out of range: " + std::to_string(*it));
      }
      stack.push_back(*it);
    }
  }
  if (order.size() != nodes.size()) {
    throw StructuralError("tree has nodes unreachable from the root");
  }
  return order;
}

}  // namespace

DomTree DomTree::build(std::string page_id, std::vector<DomNode> nodes) {
  if (nodes.empty()) throw StructuralError("tree has no nodes");
  std::optional<int> root;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    if (n.id != static_cast<int>(i)) {
      throw StructuralError("node ids must be dense, got " +
                            std::to_string(n.id) + " at " + std::to_string(i));
    }
    if (!n.parent_id) {
      if (root) throw StructuralError("tree has more than one root");
      root = n.id;
      continue;
    }
    int p = *n.parent_id;
    if (p < 0 || static_cast<std::size_t>(p) >= nodes.size() || p == n.id) {
      throw StructuralError("bad parent id for node " + std::to_string(n.id));
    }
    int refs = 0;
    for (int c : nodes[p].child_ids) refs += (c == n.id);
    if (refs != 1) {
      throw StructuralError("parent " + std::to_string(p) +
                            " does not list child " + std::to_string(n.id) +
                            " exactly once");
    }
  }
  if (!root) throw StructuralError("tree has no root");
  for (const auto& n : nodes) {
    for (int c : n.child_ids) {
      if (c < 0 || static_cast<std::size_t>(c) >= nodes.size() ||
          nodes[c].parent_id != n.id) {
        throw StructuralError("child link " + std::to_string(n.id) + "->" +
                              std::to_string(c) + " is not mirrored");
      }
    }
  }

  DomTree tree;
  tree.page_id_ = std::move(page_id);
  tree.root_id_ = *root;
  tree.nodes_ = std::move(nodes);
  auto order = walk(tree.nodes_, tree.root_id_);

  tree.leaf_rank_.assign(tree.nodes_.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    auto& n = tree.nodes_[order[pos]];
    n.dfs_position = static_cast<int>(pos) + 1;
    if (n.text) {
      if (!n.child_ids.empty()) {
        throw StructuralError("text node " + std::to_string(n.id) +
                              " must be a leaf");
      }
      if (n.node_class == NodeClass::kNonText) n.node_class = NodeClass::kVariable;
      tree.text_leaves_.push_back(n.id);
      tree.leaf_rank_[n.id] = static_cast<int>(tree.text_leaves_.size());
    } else {
      n.node_class = NodeClass::kNonText;
    }
    if (!n.parent_id) {
      n.indexed_xpath = "/" + xpath_segment(n.tag) + "[1]";
    } else {
      const auto& parent = tree.nodes_[*n.parent_id];
      int index = 0;
      for (int sib : parent.child_ids) {
        if (tree.nodes_[sib].tag == n.tag) ++index;
        if (sib == n.id) break;
      }
      n.indexed_xpath = parent.indexed_xpath + "/" + xpath_segment(n.tag) +
                        "[" + std::to_string(index) + "]";
    }
    if (!tree.by_xpath_.emplace(n.indexed_xpath, n.id).second) {
      throw StructuralError("duplicate xpath " + n.indexed_xpath);
    }
  }
  return tree;
}

const DomNode& DomTree::node(int id) const {
  if (!contains(id)) {
    throw LookupError("unknown node id " + std::to_string(id) + " in page '" +
                      page_id_ + "'");
  }
  return nodes_[id];
}

int DomTree::depth(int id) const {
  int d = 0;
  for (auto p = node(id).parent_id; p; p = nodes_[*p].parent_id) ++d;
  return d;
}

std::optional<int> DomTree::find_by_xpath(std::string_view xpath) const {
  auto it = by_xpath_.find(std::string(xpath));
  if (it == by_xpath_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> DomTree::variable_nodes() const {
  std::vector<int> out;
  for (int id : text_leaves_) {
    if (nodes_[id].node_class == NodeClass::kVariable) out.push_back(id);
  }
  return out;
}

void DomTree::set_node_classes(std::span<const NodeClass> classes) {
  if (classes.size() != nodes_.size()) {
    throw ArgumentError("node class vector has wrong length");
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    bool text = nodes_[i].text.has_value();
    if (text == (classes[i] == NodeClass::kNonText)) {
      throw ArgumentError("node " + std::to_string(i) +
                          ": non-text class must match missing text");
    }
  }
  for (std::size_t i = 0; i < classes.size(); ++i) nodes_[i].node_class = classes[i];
}

std::vector<std::string> tag_path(const DomNode& node, const DomTree& tree) {
  std::vector<std::string> path;
  const DomNode* cur = &tree.node(node.id);
  while (true) {
    path.push_back(cur->tag);
    if (!cur->parent_id) break;
    cur = &tree.node(*cur->parent_id);
  }
  return {path.rbegin(), path.rend()};
}

std::vector<int> ancestors(const DomNode& node, const DomTree& tree, int k) {
  if (k < 1) throw ArgumentError("ancestor count k must be >= 1");
  std::vector<int> out;
  auto p = tree.node(node.id).parent_id;
  while (p && static_cast<int>(out.size()) < k) {
    out.push_back(*p);
    p = tree.node(*p).parent_id;
  }
  return out;
}

std::vector<int> dfs_order(const DomTree& tree) {
  if (tree.size() == 0) return {};
  return walk(tree.nodes(), tree.root_id());
}

}  // namespace simpdom
