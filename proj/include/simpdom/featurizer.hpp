#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simpdom/dom.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/simplifier.hpp"

namespace simpdom {

inline constexpr int kPadId = 0;
inline constexpr int kUnknownId = 1;

// Token -> id maps for words (lowercased), characters (UTF-8 code points of
// the raw tokens) and element tags. Ids 0 and 1 are reserved for padding
// and unknown tokens; real tokens start at 2 in lexicographic order.
class Vocab {
 public:
  using Table = std::map<std::string, int, std::less<>>;

  Vocab() = default;
  Vocab(Table words, Table chars, Table tags);

  int word_id(std::string_view word) const;  // lowercases first
  int char_id(std::string_view ch) const;
  int tag_id(std::string_view tag) const;

  int word_count() const { return static_cast<int>(words_.size()) + 2; }
  int char_count() const { return static_cast<int>(chars_.size()) + 2; }
  int tag_count() const { return static_cast<int>(tags_.size()) + 2; }

  const Table& words() const { return words_; }
  const Table& chars() const { return chars_; }
  const Table& tags() const { return tags_; }

  // JSON with the three maps and the reserved-id manifest.
  std::string to_json() const;
  static Vocab from_json(std::string_view json);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  bool operator==(const Vocab&) const = default;

 private:
  static int lookup(const Table& table, std::string_view token);
  Table words_, chars_, tags_;
};

// Counts tokens over every text leaf of the given (training) sites.
// Words and characters seen fewer than min_count times map to unknown;
// all observed tags are kept.
Vocab build_vocabs(std::span<const SiteCorpus> sites, int min_count = 1);

struct FeatureCaps {
  int node_words = 15;
  int friends_words = 50;
  int buckets = 10;
};

struct NodeFeatures {
  std::vector<int> node_word_ids;
  std::vector<std::vector<int>> node_char_ids;
  std::vector<int> partner_word_ids;
  std::vector<std::vector<int>> partner_char_ids;
  std::vector<int> friends_word_ids;
  std::vector<std::vector<int>> friends_char_ids;
  std::vector<int> xpath_tag_ids;
  int leaf_tag_id = kUnknownId;
  int position_bucket = 1;  // 1..B

  bool operator==(const NodeFeatures&) const = default;
};

// ceil(B * rank / leaf_count) clamped to [1, B], where rank is the node's
// 1-based position among the page's text leaves in dfs order.
int position_bucket(const DomNode& node, const DomTree& tree, int buckets = 10);

// Tag id of a text leaf. Throws ArgumentError for nodes without text.
int leaf_tag_id(const DomNode& node, const Vocab& vocab);

NodeFeatures featurize(const DomNode& node, const FriendCircle& circle,
                       const DomTree& tree, const Vocab& vocab,
                       const FeatureCaps& caps = {});

}  // namespace simpdom
