#include "simpdom/config.hpp"

#include "simpdom/errors.hpp"

namespace simpdom {

std::string to_string(Head head) { return head == Head::kIntra ? "intra" : "cross"; }

Head head_from_string(const std::string& s) {
  if (s == "intra") return Head::kIntra;
  if (s == "cross") return Head::kCross;
  throw ConfigError("head must be 'intra' or 'cross', got '" + s + "'");
}

void TrainConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(k_ancestors, "k_ancestors");
  positive(max_friends, "max_friends");
  positive(d_w, "d_w");
  positive(d_c, "d_c");
  positive(cnn_filters, "cnn_filters");
  positive(kernel, "kernel");
  positive(lstm_hidden, "lstm_hidden");
  positive(d_xpath, "d_xpath");
  positive(d_leaf, "d_leaf");
  positive(d_pos, "d_pos");
  positive(buckets, "buckets");
  positive(mlp_hidden, "mlp_hidden");
  positive(batch, "batch");
  positive(node_words, "node_words");
  positive(friends_words, "friends_words");
  if (kernel % 2 == 0) throw ConfigError("kernel must be odd for same padding");
  if (d_xpath % 2 != 0) throw ConfigError("d_xpath must be even (two LSTM directions)");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (min_word_count < 0) throw ConfigError("min_word_count must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(none_keep_ratio > 0.0 && none_keep_ratio <= 1.0)) {
    throw ConfigError("none_keep_ratio must be in (0, 1]");
  }
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["k_ancestors"] = k_ancestors;
  j["max_friends"] = max_friends;
  j["d_w"] = d_w;
  j["d_c"] = d_c;
  j["cnn_filters"] = cnn_filters;
  j["kernel"] = kernel;
  j["lstm_hidden"] = lstm_hidden;
  j["d_xpath"] = d_xpath;
  j["d_leaf"] = d_leaf;
  j["d_pos"] = d_pos;
  j["buckets"] = buckets;
  j["mlp_hidden"] = mlp_hidden;
  j["dropout"] = dropout;
  j["lr"] = lr;
  j["batch"] = batch;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["head"] = to_string(head);
  j["none_keep_ratio"] = none_keep_ratio;
  j["node_words"] = node_words;
  j["friends_words"] = friends_words;
  j["min_word_count"] = min_word_count;
  j["use_friend_circle"] = use_friend_circle;
  j["word_vectors"] = word_vectors;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    auto as_int = [&](int& dst) {
      if (!value.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
      dst = value.get<int>();
    };
    auto as_double = [&](double& dst) {
      if (!value.is_number()) throw ConfigError("config key '" + key + "' must be a number");
      dst = value.get<double>();
    };
    if (key == "k_ancestors") as_int(c.k_ancestors);
    else if (key == "max_friends") as_int(c.max_friends);
    else if (key == "d_w") as_int(c.d_w);
    else if (key == "d_c") as_int(c.d_c);
    else if (key == "cnn_filters") as_int(c.cnn_filters);
    else if (key == "kernel") as_int(c.kernel);
    else if (key == "lstm_hidden") as_int(c.lstm_hidden);
    else if (key == "d_xpath") as_int(c.d_xpath);
    else if (key == "d_leaf") as_int(c.d_leaf);
    else if (key == "d_pos") as_int(c.d_pos);
    else if (key == "buckets") as_int(c.buckets);
    else if (key == "mlp_hidden") as_int(c.mlp_hidden);
    else if (key == "dropout") as_double(c.dropout);
    else if (key == "lr") as_double(c.lr);
    else if (key == "batch") as_int(c.batch);
    else if (key == "epochs") as_int(c.epochs);
    else if (key == "node_words") as_int(c.node_words);
    else if (key == "friends_words") as_int(c.friends_words);
    else if (key == "min_word_count") as_int(c.min_word_count);
    else if (key == "none_keep_ratio") as_double(c.none_keep_ratio);
    else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw ConfigError("config key 'seed' must be a non-negative integer");
      }
      if (value.is_number_integer() && value.get<long long>() < 0) {
        throw ConfigError("config key 'seed' must be a non-negative integer");
      }
      c.seed = value.get<std::uint64_t>();
    } else if (key == "head") {
      if (!value.is_string()) throw ConfigError("config key 'head' must be a string");
      c.head = head_from_string(value.get<std::string>());
    } else if (key == "use_friend_circle") {
      if (!value.is_boolean()) throw ConfigError("config key 'use_friend_circle' must be a boolean");
      c.use_friend_circle = value.get<bool>();
    } else if (key == "word_vectors") {
      if (!value.is_string()) throw ConfigError("config key 'word_vectors' must be a string");
      c.word_vectors = value.get<std::string>();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace simpdom
