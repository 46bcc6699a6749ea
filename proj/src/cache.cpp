#include "simpdom/cache.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>

#include "json.hpp"

#include "simpdom/errors.hpp"
#include "simpdom/html.hpp"
#include "simpdom/simplifier.hpp"
#include "simpdom/text.hpp"

namespace simpdom {

namespace fs = std::filesystem;

namespace {

class Hasher {
 public:
  void add(std::string_view s) {
    add_raw(std::to_string(s.size()));
    add_raw(":");
    add_raw(s);
  }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  void add_raw(std::string_view s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string read_first_line(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (in) std::getline(in, line);
  return line;
}

nlohmann::ordered_json header_json(const std::string& vertical, const std::string& site,
                                   int k, int max_friends, const std::string& digest,
                                   int version) {
  nlohmann::ordered_json h;
  h["cache_version"] = version;
  h["digest"] = digest;
  h["vertical"] = vertical;
  h["site"] = site;
  h["k"] = k;
  h["max_friends"] = max_friends;
  return h;
}

}  // namespace

fs::path cache_dir_from_env(const fs::path& fallback) {
  if (const char* env = std::getenv("SIMPDOM_CACHE_DIR"); env && *env) return env;
  return fallback;
}

std::string site_digest(const fs::path& root, const std::string& vertical,
                        const std::string& site, int k, int max_friends, int version) {
  Hasher h;
  h.add("simpdom-cache");
  h.add(std::to_string(version));
  h.add(std::to_string(kTagTableVersion));
  h.add(std::to_string(k));
  h.add(std::to_string(max_friends));
  h.add(read_file(root / vertical / "attributes.txt"));
  const fs::path site_dir = root / vertical / site;
  h.add(read_file(site_dir / "groundtruth.jsonl"));
  std::vector<fs::path> pages;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(site_dir / "pages", ec)) {
    if (e.is_regular_file() && e.path().extension() == ".htm") pages.push_back(e.path());
  }
  if (ec) throw IoError("cannot list pages of site '" + site + "': " + ec.message());
  std::sort(pages.begin(), pages.end());
  for (const auto& p : pages) {
    h.add(p.filename().string());
    h.add(read_file(p));
  }
  return h.hex();
}

std::string serialize_site(const SiteCorpus& site, int k, int max_friends,
                           const std::string& digest, int version) {
  std::string out = header_json(site.vertical, site.site_id, k, max_friends, digest, version).dump();
  out += "\n";
  for (const auto& page : site.pages) {
    const auto& tree = page.tree;
    nlohmann::ordered_json pj;
    pj["page"] = page.page_id;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes()) {
      nlohmann::ordered_json nj;
      nj["id"] = n.id;
      nj["parent"] = n.parent_id ? nlohmann::ordered_json(*n.parent_id) : nullptr;
      nj["tag"] = n.tag;
      nj["xpath"] = n.indexed_xpath;
      nj["dfs"] = n.dfs_position;
      nj["class"] = to_string(n.node_class);
      if (n.text) nj["text"] = *n.text;
      nodes.push_back(std::move(nj));
    }
    pj["nodes"] = std::move(nodes);
    auto labels = nlohmann::ordered_json::array();
    for (const auto& l : page.labels) labels.push_back({l.node_id, l.label});
    pj["labels"] = std::move(labels);

    auto circles = nlohmann::ordered_json::array();
    for (const auto& [id, c] : simplify(tree, k, max_friends)) {
      nlohmann::ordered_json cj;
      cj["node"] = id;
      cj["partner"] = c.partner_id ? nlohmann::ordered_json(*c.partner_id) : nullptr;
      cj["friends"] = c.friend_ids;
      cj["tokens"] = split_words(truncate_text(tree.node(id).text.value_or("")));
      circles.push_back(std::move(cj));
    }
    pj["circles"] = std::move(circles);
    out += pj.dump();
    out += "\n";
  }
  return out;
}

std::vector<CacheEntry> preprocess_vertical(const fs::path& root, const std::string& vertical,
                                            const fs::path& cache_dir, int k, int max_friends,
                                            int jobs, int version) {
  if (!fs::is_directory(root)) throw ArgumentError("corpus root not found: " + root.string());
  const auto attributes = read_attributes(root / vertical / "attributes.txt");
  const auto sites = list_sites(root, vertical);
  const fs::path dir = cache_dir / vertical;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create cache directory '" + dir.string() + "': " + ec.message());

  auto one = [&](const std::string& site) {
    CacheEntry entry{vertical, site, dir / (site + ".jsonl"), false};
    const auto digest = site_digest(root, vertical, site, k, max_friends, version);
    const auto expected = header_json(vertical, site, k, max_friends, digest, version).dump();
    if (fs::exists(entry.file) && read_first_line(entry.file) == expected) {
      entry.hit = true;
      return entry;
    }
    const auto corpus = load_site(root, vertical, site, attributes);
    const auto body = serialize_site(corpus, k, max_friends, digest, version);
    const fs::path tmp = entry.file.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out || !(out << body)) throw IoError("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, entry.file);
    return entry;
  };

  std::vector<CacheEntry> out(sites.size());
  const auto step = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t begin = 0; begin < sites.size(); begin += step) {
    std::vector<std::future<CacheEntry>> batch;
    for (std::size_t i = begin; i < std::min(sites.size(), begin + step); ++i) {
      batch.push_back(std::async(step > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] { return one(sites[i]); }));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) out[begin + j] = batch[j].get();
  }
  return out;
}

}  // namespace simpdom
