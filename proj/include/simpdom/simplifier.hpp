#pragma once

#include <map>
#include <optional>
#include <vector>

#include "simpdom/dom.hpp"

namespace simpdom {

inline constexpr int kDefaultAncestors = 5;
inline constexpr int kDefaultMaxFriends = 10;

// Context of one variable node: at most one partner and the friend leaves
// sharing a nearby common ancestor, ordered by dfs position. The partner is
// never repeated among the friends.
struct FriendCircle {
  int node_id = 0;
  std::optional<int> partner_id;
  std::vector<int> friend_ids;

  bool operator==(const FriendCircle&) const = default;
};

// Friend circles for every variable node of the tree.
//
// Every text leaf (variable or fixed) is indexed under its k closest
// ancestors. For a variable node x the ancestors are then visited nearest
// first: the other leaves indexed under the ancestor form DESC; the first
// time DESC is non-empty and holds exactly one leaf, that leaf becomes the
// partner. All DESC sets are unioned into the friends.
std::map<int, FriendCircle> extract_circles(const DomTree& tree,
                                            int k = kDefaultAncestors);

// Keeps the max_friends friends closest in dfs position to the circle's
// node (ties go to the smaller position), preserving dfs order.
FriendCircle trim_friends(const FriendCircle& circle, const DomTree& tree,
                          int max_friends = kDefaultMaxFriends);

// extract_circles followed by trim_friends on every circle.
std::map<int, FriendCircle> simplify(const DomTree& tree,
                                     int k = kDefaultAncestors,
                                     int max_friends = kDefaultMaxFriends);

}  // namespace simpdom
