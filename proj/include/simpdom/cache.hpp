#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "simpdom/ingest.hpp"

namespace simpdom {

inline constexpr int kCacheVersion = 1;

// $SIMPDOM_CACHE_DIR when set, otherwise `fallback`.
std::filesystem::path cache_dir_from_env(const std::filesystem::path& fallback);

struct CacheEntry {
  std::string vertical;
  std::string site;
  std::filesystem::path file;
  bool hit = false;
};

// Digest over the cache version, tag table version, k, max_friends, the
// attribute list and every input file of the site.
std::string site_digest(const std::filesystem::path& root, const std::string& vertical,
                        const std::string& site, int k, int max_friends,
                        int version = kCacheVersion);

// JSON lines: a header {"cache_version", "digest", ...} followed by one
// object per page with its nodes, labels, friend circles and tokens.
std::string serialize_site(const SiteCorpus& site, int k, int max_friends,
                           const std::string& digest, int version = kCacheVersion);

// Writes <cache_dir>/<vertical>/<site>.jsonl for every site whose digest
// changed; unchanged sites are reported as hits and left untouched.
std::vector<CacheEntry> preprocess_vertical(const std::filesystem::path& root,
                                            const std::string& vertical,
                                            const std::filesystem::path& cache_dir, int k,
                                            int max_friends, int jobs = 1,
                                            int version = kCacheVersion);

}  // namespace simpdom
