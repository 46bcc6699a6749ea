#pragma once

// Small generated corpora with known structure, used by the experiment
// harness, the tests and the `generate` command.
//
// Every vertical has labelled fields ("by", "ISBN:") next to their values
// and decoy fields of the same value type under a different label
// ("Edited by", "EAN:"), so the label is the only thing separating a value
// from its decoy. Even-numbered sites use a table layout, odd-numbered
// sites a div/span layout. A random set of badges in front of the fields
// varies the surrounding text from page to page.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "simpdom/ingest.hpp"

namespace simpdom {

struct RawSite {
  std::string site_id;
  std::vector<RawPage> pages;
};

struct RawVertical {
  std::string name;
  std::vector<std::string> attributes;
  std::vector<RawSite> sites;
};

struct SynthOptions {
  int sites = 2;
  int pages_per_site = 20;
  std::uint64_t seed = 0;
};

// "book": title, author, isbn.
RawVertical synth_book(const SynthOptions& options = {});
// "album": title, artist, label, catalog.
RawVertical synth_album(const SynthOptions& options = {});
// Dispatches on "book" or "album".
RawVertical synth_vertical(const std::string& name, const SynthOptions& options = {});

std::vector<SiteCorpus> build_vertical(const RawVertical& vertical);

// Writes <root>/<name>/{attributes.txt, <site>/pages/*.htm, <site>/groundtruth.jsonl}.
void write_vertical(const std::filesystem::path& root, const RawVertical& vertical);

}  // namespace simpdom
