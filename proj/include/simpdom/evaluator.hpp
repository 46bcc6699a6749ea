#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "simpdom/config.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/tagger.hpp"

namespace simpdom {

// Exact-match page F1. Attributes with an empty gold list do not count
// toward recall; a page with no gold values and no predictions scores 1.
double page_f1(const std::map<std::string, std::string>& predicted, const GoldMap& gold);

struct SiteSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Shuffles the sorted site ids with a generator seeded by `seed`, then
// takes k consecutive sites starting at `rotation` as the training set.
SiteSplit seed_split(std::vector<std::string> sites, int k, std::uint64_t seed,
                     int rotation = 0);

struct PageScore {
  std::string site;
  std::string page;
  double f1 = 0.0;
};

struct AttributeCounts {
  int correct = 0;
  int predicted = 0;
  int gold = 0;
  double f1() const;
};

// Scores of one model on a set of held-out sites.
struct Scores {
  std::vector<PageScore> pages;
  std::map<std::string, double> site_mean;
  std::map<std::string, AttributeCounts> attributes;
  double mean = 0.0;  // mean of site means
};

Scores evaluate(const TrainedModel& model, std::span<const SiteCorpus> sites);

struct RunRecord {
  std::uint64_t seed = 0;
  int rotation = 0;
  SiteSplit split;
  Scores scores;
  std::optional<Scores> scratch;  // cross-vertical control run
};

struct EvalReport {
  std::string protocol;  // "intra", "cross" or "eval"
  std::string vertical;
  std::string source_vertical;  // cross only
  int k = 0;
  nlohmann::ordered_json config;
  std::vector<RunRecord> runs;

  double mean() const;          // mean over runs
  double scratch_mean() const;  // cross only
  std::map<std::string, double> attribute_f1() const;

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

std::vector<const SiteCorpus*> select_sites(std::span<const SiteCorpus> sites,
                                            const std::vector<std::string>& ids);

// For every (seed, rotation): train on k sites, score the rest.
EvalReport run_intra(std::span<const SiteCorpus> sites, int k,
                     const std::vector<std::uint64_t>& seeds, const TrainConfig& config,
                     int rotations = 1);

// Pretrains a cross-head model on all of `source`, then for every (seed,
// rotation) finetunes it on k target sites and also trains a fresh model on
// the same sites; both are scored on the remaining target sites.
EvalReport run_cross(std::span<const SiteCorpus> source, std::span<const SiteCorpus> target,
                     int k, const std::vector<std::uint64_t>& seeds,
                     const TrainConfig& pretrain_config, const TrainConfig& finetune_config,
                     int rotations = 1);

}  // namespace simpdom
