#include "simpdom/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "simpdom/errors.hpp"
#include "simpdom/html.hpp"
#include "simpdom/text.hpp"

namespace fs = std::filesystem;

namespace simpdom {

std::vector<std::vector<NodeClass>> classify_variable_nodes(
    std::span<const DomTree> pages) {
  if (pages.empty()) throw ArgumentError("classify_variable_nodes: no pages");

  struct Occurrence {
    int pages = 0;
    const std::string* text = nullptr;
    bool constant = true;
  };
  std::unordered_map<std::string, Occurrence> by_xpath;
  for (const auto& tree : pages) {
    for (int id : tree.text_leaves()) {
      const auto& n = tree.node(id);
      auto& occ = by_xpath[n.indexed_xpath];
      ++occ.pages;
      if (!occ.text) {
        occ.text = &*n.text;
      } else if (*occ.text != *n.text) {
        occ.constant = false;
      }
    }
  }

  std::vector<std::vector<NodeClass>> out;
  out.reserve(pages.size());
  for (const auto& tree : pages) {
    std::vector<NodeClass> classes(tree.size(), NodeClass::kNonText);
    for (int id : tree.text_leaves()) {
      const auto& occ = by_xpath.at(tree.node(id).indexed_xpath);
      classes[id] = occ.pages >= 2 && occ.constant ? NodeClass::kFixed
                                                   : NodeClass::kVariable;
    }
    out.push_back(std::move(classes));
  }
  return out;
}

Alignment align_gold_labels(const DomTree& tree, const GoldMap& gold,
                            std::span<const std::string> attributes) {
  const int none = static_cast<int>(attributes.size());
  std::unordered_map<std::string, std::vector<int>> value_to_attrs;
  for (const auto& [name, values] : gold) {
    auto it = std::find(attributes.begin(), attributes.end(), name);
    if (it == attributes.end()) {
      throw SchemaError("gold attribute '" + name +
                        "' is not in the vertical's attribute list");
    }
    int index = static_cast<int>(it - attributes.begin());
    for (const auto& v : values) {
      auto& attrs = value_to_attrs[normalize_text(v)];
      if (std::find(attrs.begin(), attrs.end(), index) == attrs.end()) {
        attrs.push_back(index);
      }
    }
  }

  Alignment result;
  for (int id : tree.variable_nodes()) {
    const auto& node = tree.node(id);
    int label = none;
    auto it = value_to_attrs.find(*node.text);
    if (it != value_to_attrs.end() && !node.text->empty()) {
      label = *std::min_element(it->second.begin(), it->second.end());
      if (it->second.size() > 1) {
        result.warnings.push_back("page '" + tree.page_id() + "' node " +
                                  node.indexed_xpath + " matches " +
                                  std::to_string(it->second.size()) +
                                  " attributes; using '" + attributes[label] +
                                  "'");
      }
    }
    result.labels.push_back({id, label});
  }
  return result;
}

SiteCorpus build_site(std::string vertical, std::string site_id,
                      std::vector<std::string> attributes,
                      std::vector<RawPage> pages) {
  if (attributes.empty()) {
    throw SchemaError("vertical '" + vertical + "' has no attributes");
  }
  std::sort(pages.begin(), pages.end(),
            [](const RawPage& a, const RawPage& b) { return a.page_id < b.page_id; });

  SiteCorpus site;
  site.vertical = std::move(vertical);
  site.site_id = std::move(site_id);
  site.attributes = std::move(attributes);

  std::vector<DomTree> trees;
  trees.reserve(pages.size());
  for (const auto& raw : pages) trees.push_back(parse_page(raw.html, raw.page_id));
  if (!trees.empty()) {
    auto classes = classify_variable_nodes(trees);
    for (std::size_t i = 0; i < trees.size(); ++i) trees[i].set_node_classes(classes[i]);
  }

  for (std::size_t i = 0; i < pages.size(); ++i) {
    GoldMap gold;
    for (auto& [name, values] : pages[i].gold) {
      auto& dst = gold[name];
      for (const auto& v : values) dst.push_back(normalize_text(v));
    }
    auto aligned = align_gold_labels(trees[i], gold, site.attributes);
    site.warnings.insert(site.warnings.end(), aligned.warnings.begin(),
                         aligned.warnings.end());
    site.pages.push_back({pages[i].page_id, std::move(trees[i]), std::move(gold),
                          std::move(aligned.labels)});
  }
  return site;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_attributes(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("missing attribute list " + file.string());
  std::vector<std::string> attrs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto name = collapse_whitespace(line);
    if (name.empty()) continue;
    if (std::find(attrs.begin(), attrs.end(), name) != attrs.end()) {
      throw FormatError("duplicate attribute '" + name + "' in " + file.string(),
                        line_no);
    }
    attrs.push_back(name);
  }
  if (attrs.empty()) throw SchemaError("empty attribute list " + file.string());
  return attrs;
}

namespace {

std::map<std::string, GoldMap> read_groundtruth(const fs::path& file,
                                                const std::string& site_id) {
  std::ifstream in(file);
  if (!in) {
    throw IoError("missing ground-truth file for site '" + site_id + "': " +
                  file.string());
  }
  std::map<std::string, GoldMap> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (collapse_whitespace(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(file.string() + ": invalid JSON: " + e.what(), line_no);
    }
    if (!obj.is_object() || !obj.contains("page") || !obj["page"].is_string() ||
        !obj.contains("attributes") || !obj["attributes"].is_object()) {
      throw FormatError(file.string() +
                            ": expected {\"page\": str, \"attributes\": {...}}",
                        line_no);
    }
    GoldMap gold;
    for (const auto& [name, values] : obj["attributes"].items()) {
      if (!values.is_array()) {
        throw FormatError(file.string() + ": values of '" + name +
                              "' must be a list of strings",
                          line_no);
      }
      auto& dst = gold[name];
      for (const auto& v : values) {
        if (!v.is_string()) {
          throw FormatError(file.string() + ": values of '" + name +
                                "' must be a list of strings",
                            line_no);
        }
        dst.push_back(v.get<std::string>());
      }
    }
    auto page = obj["page"].get<std::string>();
    if (!out.emplace(page, std::move(gold)).second) {
      throw FormatError(file.string() + ": duplicate page '" + page + "'", line_no);
    }
  }
  return out;
}

std::vector<std::string> list_dirs(const fs::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory()) out.push_back(entry.path().filename().string());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SiteCorpus load_site(const fs::path& root, const std::string& vertical,
                     const std::string& site_id,
                     const std::vector<std::string>& attributes) {
  const fs::path site_dir = root / vertical / site_id;
  auto gold = read_groundtruth(site_dir / "groundtruth.jsonl", site_id);

  std::vector<RawPage> pages;
  const fs::path pages_dir = site_dir / "pages";
  if (!fs::is_directory(pages_dir)) {
    throw IoError("missing pages directory " + pages_dir.string());
  }
  for (const auto& entry : fs::directory_iterator(pages_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".htm") continue;
    RawPage page;
    page.page_id = entry.path().stem().string();
    page.html = read_file(entry.path());
    if (auto it = gold.find(page.page_id); it != gold.end()) {
      page.gold = std::move(it->second);
      gold.erase(it);
    }
    pages.push_back(std::move(page));
  }
  if (!gold.empty()) {
    throw IoError("ground truth of site '" + site_id + "' names missing page '" +
                  gold.begin()->first + "'");
  }
  return build_site(vertical, site_id, attributes, std::move(pages));
}

std::vector<std::string> list_verticals(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("corpus root not found: " + root.string());
  std::vector<std::string> out;
  for (auto& name : list_dirs(root)) {
    if (fs::exists(root / name / "attributes.txt")) out.push_back(name);
  }
  return out;
}

std::vector<std::string> list_sites(const fs::path& root, const std::string& vertical) {
  const fs::path dir = root / vertical;
  if (!fs::is_directory(dir)) throw IoError("vertical not found: " + dir.string());
  return list_dirs(dir);
}

std::vector<SiteCorpus> load_vertical(const fs::path& root,
                                      const std::string& vertical, int jobs) {
  auto attributes = read_attributes(root / vertical / "attributes.txt");
  auto sites = list_sites(root, vertical);
  std::vector<SiteCorpus> out(sites.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      out[i] = load_site(root, vertical, sites[i], attributes);
    }
    return out;
  }
  for (std::size_t begin = 0; begin < sites.size(); begin += jobs) {
    std::vector<std::future<SiteCorpus>> batch;
    for (std::size_t i = begin; i < std::min(sites.size(), begin + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] {
        return load_site(root, vertical, sites[i], attributes);
      }));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) out[begin + j] = batch[j].get();
  }
  return out;
}

std::vector<SiteCorpus> load_corpus(const fs::path& root, int jobs) {
  std::vector<SiteCorpus> out;
  for (const auto& vertical : list_verticals(root)) {
    auto sites = load_vertical(root, vertical, jobs);
    for (auto& s : sites) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace simpdom
