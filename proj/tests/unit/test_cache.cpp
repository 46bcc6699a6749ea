#include "doctest.h"

#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "simpdom/cache.hpp"
#include "simpdom/errors.hpp"
#include "simpdom/synth.hpp"
#include "support.hpp"

using namespace simpdom;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("second run is a cache hit with identical bytes") {
  testing::TempDir dir("cache");
  const auto corpus = dir.path() / "corpus";
  const auto cache = dir.path() / "cache";
  write_vertical(corpus, synth_book({2, 3, 1}));

  auto first = preprocess_vertical(corpus, "book", cache, 5, 10);
  REQUIRE(first.size() == 2);
  for (const auto& e : first) CHECK_FALSE(e.hit);
  const auto bytes = slurp(first[0].file);
  const auto mtime = fs::last_write_time(first[0].file);

  auto second = preprocess_vertical(corpus, "book", cache, 5, 10, 2);
  for (const auto& e : second) CHECK(e.hit);
  CHECK(slurp(second[0].file) == bytes);
  CHECK(fs::last_write_time(second[0].file) == mtime);

  auto header = nlohmann::json::parse(bytes.substr(0, bytes.find('\n')));
  CHECK(header["cache_version"] == kCacheVersion);
  CHECK(header["k"] == 5);

  SUBCASE("a version bump rebuilds everything") {
    for (const auto& e : preprocess_vertical(corpus, "book", cache, 5, 10, 1, kCacheVersion + 1)) {
      CHECK_FALSE(e.hit);
    }
  }
  SUBCASE("changing k rebuilds") {
    for (const auto& e : preprocess_vertical(corpus, "book", cache, 3, 10)) CHECK_FALSE(e.hit);
  }
  SUBCASE("editing a page rebuilds only its site") {
    const auto site = first[0].site;
    std::ofstream(corpus / "book" / site / "pages" / "0001.htm", std::ios::app) << "<p>new</p>";
    auto third = preprocess_vertical(corpus, "book", cache, 5, 10);
    CHECK_FALSE(third[0].hit);
    CHECK(third[1].hit);
  }
}

TEST_CASE("digests and errors") {
  testing::TempDir dir("cache-digest");
  write_vertical(dir.path(), synth_book({1, 2, 1}));
  const auto site = list_sites(dir.path(), "book")[0];
  const auto d = site_digest(dir.path(), "book", site, 5, 10);
  CHECK(d == site_digest(dir.path(), "book", site, 5, 10));
  CHECK(d != site_digest(dir.path(), "book", site, 5, 9));
  CHECK(d != site_digest(dir.path(), "book", site, 5, 10, kCacheVersion + 1));
  CHECK_THROWS_AS(preprocess_vertical(dir.path() / "missing", "book", dir.path() / "c", 5, 10),
                  ArgumentError);
}

TEST_CASE("cache directory from the environment") {
  ::setenv("SIMPDOM_CACHE_DIR", "/tmp/somewhere", 1);
  CHECK(cache_dir_from_env("fallback") == fs::path("/tmp/somewhere"));
  ::unsetenv("SIMPDOM_CACHE_DIR");
  CHECK(cache_dir_from_env("fallback") == fs::path("fallback"));
}
