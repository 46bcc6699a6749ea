#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "simpdom/featurizer.hpp"

namespace simpdom {

enum class Head { kIntra, kCross };

std::string to_string(Head head);
Head head_from_string(const std::string& s);

// Model and training hyper-parameters.
struct TrainConfig {
  int k_ancestors = 5;
  int max_friends = 10;
  int d_w = 100;
  int d_c = 100;
  int cnn_filters = 50;
  int kernel = 3;
  int lstm_hidden = 100;
  int d_xpath = 30;
  int d_leaf = 30;
  int d_pos = 20;
  int buckets = 10;
  int mlp_hidden = 100;
  double dropout = 0.3;
  double lr = 0.001;
  int batch = 32;
  int epochs = 15;
  std::uint64_t seed = 0;
  Head head = Head::kIntra;
  double none_keep_ratio = 1.0;

  int node_words = 15;
  int friends_words = 50;
  int min_word_count = 2;
  bool use_friend_circle = true;
  std::string word_vectors;  // optional pretrained vectors file

  int d_enc() const { return 2 * lstm_hidden; }
  FeatureCaps caps() const { return {node_words, friends_words, buckets}; }

  // Throws ConfigError on non-positive dimensions or out-of-range rates.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  // Strict: unknown keys and wrongly typed values raise ConfigError.
  // Missing keys keep their defaults.
  static TrainConfig from_json(const nlohmann::json& j);
};

}  // namespace simpdom
