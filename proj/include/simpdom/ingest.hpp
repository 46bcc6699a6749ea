#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simpdom/dom.hpp"

namespace simpdom {

// attribute name -> gold value strings (normalized).
using GoldMap = std::map<std::string, std::vector<std::string>>;

// label is an attribute index in [0, M), or M for "none".
struct NodeLabel {
  int node_id = 0;
  int label = 0;
};

struct Page {
  std::string page_id;
  DomTree tree;
  GoldMap gold;
  std::vector<NodeLabel> labels;  // one per variable node, dfs order
};

struct SiteCorpus {
  std::string vertical;
  std::string site_id;
  std::vector<std::string> attributes;
  std::vector<Page> pages;  // sorted by page_id
  std::vector<std::string> warnings;

  int num_attributes() const { return static_cast<int>(attributes.size()); }
  int none_label() const { return num_attributes(); }
};

// Unparsed page plus its gold annotation, as read from disk or generated.
struct RawPage {
  std::string page_id;
  std::string html;
  GoldMap gold;
};

// Per page, a node class for every node. A text leaf is fixed iff its
// indexed xpath occurs on at least two pages with identical text on every
// page where it occurs.
std::vector<std::vector<NodeClass>> classify_variable_nodes(
    std::span<const DomTree> pages);

struct Alignment {
  std::vector<NodeLabel> labels;
  std::vector<std::string> warnings;
};

// Exact-match alignment of gold values onto variable nodes. A node whose
// text matches several attributes takes the lowest index and a warning is
// recorded.
Alignment align_gold_labels(const DomTree& tree, const GoldMap& gold,
                            std::span<const std::string> attributes);

// Parses, classifies and labels one site's pages.
SiteCorpus build_site(std::string vertical, std::string site_id,
                      std::vector<std::string> attributes,
                      std::vector<RawPage> pages);

std::vector<std::string> read_attributes(const std::filesystem::path& file);

// Reads <root>/<vertical>/<site>/{pages/*.htm, groundtruth.jsonl}.
SiteCorpus load_site(const std::filesystem::path& root,
                     const std::string& vertical, const std::string& site_id,
                     const std::vector<std::string>& attributes);

std::vector<std::string> list_verticals(const std::filesystem::path& root);
std::vector<std::string> list_sites(const std::filesystem::path& root,
                                    const std::string& vertical);

// All sites of one vertical, ordered by site id. `jobs` > 1 loads sites on
// worker threads; the result is identical to a sequential load.
std::vector<SiteCorpus> load_vertical(const std::filesystem::path& root,
                                      const std::string& vertical,
                                      int jobs = 1);

// Every vertical under root.
std::vector<SiteCorpus> load_corpus(const std::filesystem::path& root,
                                    int jobs = 1);

std::string read_file(const std::filesystem::path& path);

}  // namespace simpdom
