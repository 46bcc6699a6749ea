#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "simpdom/dom.hpp"
#include "simpdom/neural/tensor.hpp"
#include "simpdom/simplifier.hpp"

namespace simpdom::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SIMPDOM_FIXTURE_DIR) / name;
}

// A fresh directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("simpdom-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Random tree of at most max_nodes nodes and max_children children per
// element. Text leaves are fixed with probability 0.4.
inline DomTree random_tree(nn::Rng& rng, int max_nodes = 50, int max_children = 6) {
  static const char* kTags[] = {"div", "span", "td", "p", "li"};
  const int target = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_nodes - 1));
  std::vector<DomNode> nodes;
  DomNode root;
  root.id = 0;
  root.tag = "html";
  nodes.push_back(root);
  std::vector<int> open{0};
  while (static_cast<int>(nodes.size()) < target && !open.empty()) {
    const auto slot = static_cast<std::size_t>(rng() % open.size());
    const int parent = open[slot];
    DomNode n;
    n.id = static_cast<int>(nodes.size());
    n.parent_id = parent;
    if (nn::uniform01(rng) < 0.45) {
      n.tag = kTags[rng() % 5];
      n.text = "t" + std::to_string(n.id);
    } else {
      n.tag = kTags[rng() % 5];
      open.push_back(n.id);
    }
    nodes[static_cast<std::size_t>(parent)].child_ids.push_back(n.id);
    if (static_cast<int>(nodes[static_cast<std::size_t>(parent)].child_ids.size()) >= max_children) {
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(slot));
    }
    nodes.push_back(std::move(n));
  }
  auto tree = DomTree::build("random", std::move(nodes));
  std::vector<NodeClass> classes;
  for (const auto& n : tree.nodes()) {
    if (!n.is_text_leaf()) {
      classes.push_back(NodeClass::kNonText);
    } else {
      classes.push_back(nn::uniform01(rng) < 0.4 ? NodeClass::kFixed : NodeClass::kVariable);
    }
  }
  tree.set_node_classes(classes);
  return tree;
}

inline std::vector<int> root_path(const DomTree& tree, int id) {
  std::vector<int> path;
  for (std::optional<int> cur = id; cur; cur = tree.node(*cur).parent_id) path.push_back(*cur);
  std::reverse(path.begin(), path.end());
  return path;
}

// Brute-force circles from explicit root paths. A text leaf f is a friend
// of x iff the lowest common ancestor of x and f is at most k edges above
// both of them. The partner is the friend whose LCA with x is strictly
// closer to x than every other friend's, if there is exactly one such.
inline std::map<int, FriendCircle> oracle_circles(const DomTree& tree, int k) {
  std::map<int, FriendCircle> out;
  for (const auto& x : tree.nodes()) {
    if (x.node_class != NodeClass::kVariable) continue;
    const auto px = root_path(tree, x.id);
    std::vector<std::pair<int, int>> friends;  // (dist from x to LCA, id)
    for (int f : tree.text_leaves()) {
      if (f == x.id) continue;
      const auto pf = root_path(tree, f);
      std::size_t common = 0;
      while (common < px.size() && common < pf.size() && px[common] == pf[common]) ++common;
      const int dx = static_cast<int>(px.size() - common);
      const int df = static_cast<int>(pf.size() - common);
      if (dx <= k && df <= k) friends.emplace_back(dx, f);
    }
    FriendCircle c;
    c.node_id = x.id;
    if (!friends.empty()) {
      int best = friends.front().first;
      for (const auto& [d, _] : friends) best = std::min(best, d);
      int count = 0, who = -1;
      for (const auto& [d, f] : friends) {
        if (d == best) {
          ++count;
          who = f;
        }
      }
      if (count == 1) c.partner_id = who;
    }
    for (const auto& [_, f] : friends) {
      if (!c.partner_id || f != *c.partner_id) c.friend_ids.push_back(f);
    }
    std::sort(c.friend_ids.begin(), c.friend_ids.end(), [&](int a, int b) {
      return tree.node(a).dfs_position < tree.node(b).dfs_position;
    });
    out.emplace(x.id, std::move(c));
  }
  return out;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1e-6, std::abs(analytic), std::abs(numeric)});
}

struct GradReport {
  double max_error = 0.0;
  std::string worst;
  int checked = 0;
};

// Central differences for every entry of `t` (or an evenly strided subset
// of at most max_entries) against the analytic gradient left in t.grad.
// `loss` must recompute the scalar from current parameter values.
inline void check_tensor(const std::string& name, nn::Tensor<double>& t,
                         const std::function<double()>& loss, GradReport& report,
                         double eps = 1e-5, std::size_t max_entries = 200) {
  const std::size_t n = t.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_entries);
  for (std::size_t i = 0; i < n; i += stride) {
    const double saved = t.value[i];
    t.value[i] = saved + eps;
    const double up = loss();
    t.value[i] = saved - eps;
    const double down = loss();
    t.value[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double err = relative_error(t.grad[i], numeric);
    ++report.checked;
    if (err > report.max_error) {
      report.max_error = err;
      report.worst = name + "[" + std::to_string(i) + "] analytic=" + std::to_string(t.grad[i]) +
                     " numeric=" + std::to_string(numeric);
    }
  }
}

}  // namespace simpdom::testing
