#include "simpdom/simplifier.hpp"

#include <algorithm>
#include <cstdlib>

#include "simpdom/errors.hpp"

namespace simpdom {

std::map<int, FriendCircle> extract_circles(const DomTree& tree, int k) {
  if (k < 1) throw ArgumentError("extract_circles: k must be >= 1");

  // Leaves indexed under each of their k closest ancestors, in dfs order.
  std::vector<std::vector<int>> indexed(tree.size());
  for (int leaf : tree.text_leaves()) {
    for (int anc : ancestors(tree.node(leaf), tree, k)) indexed[anc].push_back(leaf);
  }

  std::map<int, FriendCircle> circles;
  std::vector<char> is_friend(tree.size(), 0);
  for (int x : tree.variable_nodes()) {
    FriendCircle circle;
    circle.node_id = x;
    for (int anc : ancestors(tree.node(x), tree, k)) {
      const auto& pool = indexed[anc];
      const auto desc_size = pool.size() - 1;  // x is always in its own pool
      if (desc_size == 1 && !circle.partner_id && circle.friend_ids.empty()) {
        circle.partner_id = pool[0] == x ? pool[1] : pool[0];
      }
      for (int leaf : pool) {
        if (leaf == x || is_friend[leaf]) continue;
        is_friend[leaf] = 1;
        circle.friend_ids.push_back(leaf);
      }
    }
    for (int f : circle.friend_ids) is_friend[f] = 0;
    if (circle.partner_id) {
      std::erase(circle.friend_ids, *circle.partner_id);
    }
    std::sort(circle.friend_ids.begin(), circle.friend_ids.end(), [&](int a, int b) {
      return tree.node(a).dfs_position < tree.node(b).dfs_position;
    });
    circles.emplace(x, std::move(circle));
  }
  return circles;
}

FriendCircle trim_friends(const FriendCircle& circle, const DomTree& tree,
                          int max_friends) {
  if (max_friends < 0) throw ArgumentError("trim_friends: max_friends must be >= 0");
  if (static_cast<int>(circle.friend_ids.size()) <= max_friends) return circle;

  const int origin = tree.node(circle.node_id).dfs_position;
  std::vector<int> kept = circle.friend_ids;
  auto closer = [&](int a, int b) {
    int pa = tree.node(a).dfs_position;
    int pb = tree.node(b).dfs_position;
    int da = std::abs(pa - origin);
    int db = std::abs(pb - origin);
    return da != db ? da < db : pa < pb;
  };
  std::nth_element(kept.begin(), kept.begin() + max_friends, kept.end(), closer);
  kept.resize(max_friends);
  std::sort(kept.begin(), kept.end(), [&](int a, int b) {
    return tree.node(a).dfs_position < tree.node(b).dfs_position;
  });

  FriendCircle out = circle;
  out.friend_ids = std::move(kept);
  return out;
}

std::map<int, FriendCircle> simplify(const DomTree& tree, int k, int max_friends) {
  auto circles = extract_circles(tree, k);
  for (auto& [id, circle] : circles) circle = trim_friends(circle, tree, max_friends);
  return circles;
}

}  // namespace simpdom
