#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simpdom/config.hpp"
#include "simpdom/featurizer.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/model.hpp"

namespace simpdom {

struct Example {
  NodeFeatures features;
  int label = 0;
};

// One example per variable node of every page, in page then dfs order.
std::vector<Example> make_examples(const SiteCorpus& site, const Vocab& vocab,
                                   const TrainConfig& config);

// Features for every variable node of a tree, keyed by node id.
std::map<int, NodeFeatures> featurize_tree(const DomTree& tree, const Vocab& vocab,
                                           const TrainConfig& config);

struct TrainedModel {
  std::string vertical;
  std::vector<std::string> attributes;
  Vocab vocab;
  NodeTagger<float> tagger;

  const TrainConfig& config() const { return tagger.config(); }
};

struct TrainResult {
  TrainedModel model;
  std::vector<double> epoch_loss;  // mean example loss per epoch
};

// Called after every epoch (1-based) with the model as it stands.
using EpochHook = std::function<void(int epoch, double loss, const TrainedModel& model)>;

// Trains a fresh model on the given sites, which must share one attribute
// list. The vocabulary is built from these sites only.
TrainResult train(std::span<const SiteCorpus> sites, const TrainConfig& config,
                  const EpochHook& hook = {});

// Continues from a cross-head model on a new vertical: every tensor is
// kept except the attribute table, which is redrawn with M_B + 1 rows.
// Architecture and vocabulary come from the pretrained model; epochs,
// batch, lr, dropout, seed and none_keep_ratio come from `config`.
TrainResult finetune(const TrainedModel& pretrained, std::span<const SiteCorpus> sites,
                     const TrainConfig& config, const EpochHook& hook = {});

struct Prediction {
  int node_id = 0;
  int label = 0;  // attribute index, or M for none
  double probability = 0.0;
};

struct Extraction {
  std::vector<Prediction> predictions;       // variable nodes in dfs order
  std::map<std::string, std::string> values;  // attribute -> extracted text
};

// Scores every variable node of the tree. Per attribute, the most probable
// node predicted as that attribute supplies the value; ties go to the
// earlier node.
Extraction extract_page(const TrainedModel& model, const DomTree& tree);

// Reads "token v1 ... vd" lines into the rows of `table` for tokens present
// in the word vocabulary. Returns the number of rows filled.
int load_word_vectors(const std::filesystem::path& path, const Vocab& vocab,
                      nn::Tensor<float>& table);

}  // namespace simpdom
