#include "simpdom/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "simpdom/errors.hpp"
#include "simpdom/neural/adam.hpp"
#include "simpdom/simplifier.hpp"

namespace simpdom {

namespace {

void check_same_schema(std::span<const SiteCorpus> sites) {
  for (const auto& s : sites) {
    if (s.attributes != sites.front().attributes) {
      throw SchemaError("site '" + s.site_id + "' has a different attribute list from '" +
                        sites.front().site_id + "'");
    }
  }
}

std::vector<Example> collect_examples(std::span<const SiteCorpus> sites, const Vocab& vocab,
                                      const TrainConfig& config) {
  std::vector<Example> out;
  for (const auto& site : sites) {
    auto part = make_examples(site, vocab, config);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

void run_epochs(TrainedModel& model, const std::vector<Example>& examples, int none_label,
                nn::Rng& rng, TrainResult& result, const EpochHook& hook) {
  if (examples.empty()) throw ArgumentError("training set has no variable nodes");
  const TrainConfig& config = model.config();
  nn::Adam<float> adam(nn::AdamConfig{config.lr});
  auto& tagger = model.tagger;
  std::vector<std::size_t> order;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order.clear();
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (config.none_keep_ratio < 1.0 && examples[i].label == none_label &&
          nn::uniform01(rng) >= config.none_keep_ratio) {
        continue;
      }
      order.push_back(i);
    }
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }

    double epoch_loss = 0.0;
    const auto batch = static_cast<std::size_t>(config.batch);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      tagger.params().zero_grad();
      for (std::size_t j = start; j < end; ++j) {
        const Example& ex = examples[order[j]];
        const float loss = tagger.loss_and_backward(ex.features, ex.label, true, &rng);
        if (!std::isfinite(loss)) {
          throw TrainingError("loss diverged at epoch " + std::to_string(epoch));
        }
        epoch_loss += loss;
      }
      tagger.params().scale_grad(1.0f / static_cast<float>(end - start));
      try {
        adam.step(tagger.params());
      } catch (const OptimizerError& e) {
        throw TrainingError(std::string("training diverged: ") + e.what());
      }
    }
    const double mean = order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean);
    if (hook) hook(epoch, mean, model);
  }
}

}  // namespace

std::map<int, NodeFeatures> featurize_tree(const DomTree& tree, const Vocab& vocab,
                                           const TrainConfig& config) {
  std::map<int, NodeFeatures> out;
  for (const auto& [id, circle] : simplify(tree, config.k_ancestors, config.max_friends)) {
    out.emplace(id, featurize(tree.node(id), circle, tree, vocab, config.caps()));
  }
  return out;
}

std::vector<Example> make_examples(const SiteCorpus& site, const Vocab& vocab,
                                   const TrainConfig& config) {
  std::vector<Example> out;
  for (const auto& page : site.pages) {
    auto features = featurize_tree(page.tree, vocab, config);
    for (const auto& label : page.labels) {
      auto it = features.find(label.node_id);
      if (it == features.end()) {
        throw SchemaError("page '" + page.page_id + "' labels a node that is not variable");
      }
      out.push_back({std::move(it->second), label.label});
    }
  }
  return out;
}

TrainResult train(std::span<const SiteCorpus> sites, const TrainConfig& config,
                  const EpochHook& hook) {
  config.validate();
  if (sites.empty()) throw ArgumentError("train: no training sites");
  check_same_schema(sites);

  Vocab vocab = build_vocabs(sites, config.min_word_count);
  ModelShape shape{vocab.word_count(), vocab.char_count(), vocab.tag_count(),
                   sites.front().num_attributes()};
  nn::Rng rng(config.seed);
  TrainResult result{
      TrainedModel{sites.front().vertical, sites.front().attributes, vocab,
                   NodeTagger<float>(config, shape, rng)},
      {}};
  if (!config.word_vectors.empty()) {
    load_word_vectors(config.word_vectors, result.model.vocab,
                      result.model.tagger.params().at("word_emb"));
  }
  auto examples = collect_examples(sites, result.model.vocab, config);
  run_epochs(result.model, examples, sites.front().none_label(), rng, result, hook);
  return result;
}

TrainResult finetune(const TrainedModel& pretrained, std::span<const SiteCorpus> sites,
                     const TrainConfig& config, const EpochHook& hook) {
  if (pretrained.config().head != Head::kCross) {
    throw IncompatibleHeadError("finetuning needs a checkpoint trained with head=cross");
  }
  if (sites.empty()) throw ArgumentError("finetune: no training sites");
  check_same_schema(sites);

  TrainConfig merged = pretrained.config();
  merged.epochs = config.epochs;
  merged.batch = config.batch;
  merged.lr = config.lr;
  merged.dropout = config.dropout;
  merged.seed = config.seed;
  merged.none_keep_ratio = config.none_keep_ratio;
  merged.validate();

  nn::Rng rng(merged.seed);
  NodeTagger<float> tagger(merged, pretrained.tagger.shape(), pretrained.tagger.params());
  tagger.reset_attributes(sites.front().num_attributes(), rng);
  TrainResult result{TrainedModel{sites.front().vertical, sites.front().attributes,
                                  pretrained.vocab, std::move(tagger)},
                     {}};
  auto examples = collect_examples(sites, result.model.vocab, merged);
  run_epochs(result.model, examples, sites.front().none_label(), rng, result, hook);
  return result;
}

Extraction extract_page(const TrainedModel& model, const DomTree& tree) {
  const auto& shape = model.tagger.shape();
  if (shape.words != model.vocab.word_count() || shape.chars != model.vocab.char_count() ||
      shape.tags != model.vocab.tag_count()) {
    throw ConfigError("vocabulary does not match the model's embedding tables");
  }
  if (static_cast<int>(model.attributes.size()) != shape.attributes) {
    throw ConfigError("attribute list does not match the model");
  }

  Extraction out;
  auto features = featurize_tree(tree, model.vocab, model.config());
  std::vector<int> order;
  for (const auto& [id, _] : features) order.push_back(id);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return tree.node(a).dfs_position < tree.node(b).dfs_position;
  });

  const int none = shape.attributes;
  std::vector<const Prediction*> best(static_cast<std::size_t>(none), nullptr);
  out.predictions.reserve(order.size());
  for (int id : order) {
    auto p = nn::softmax(model.tagger.logits(features.at(id), false, nullptr));
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < p.size(); ++i) {
      if (p(i) > p(arg)) arg = i;
    }
    out.predictions.push_back({id, static_cast<int>(arg), static_cast<double>(p(arg))});
  }
  for (const auto& pred : out.predictions) {
    if (pred.label == none) continue;
    auto& slot = best[static_cast<std::size_t>(pred.label)];
    if (!slot || pred.probability > slot->probability) slot = &pred;
  }
  for (int a = 0; a < none; ++a) {
    if (const auto* pred = best[static_cast<std::size_t>(a)]) {
      out.values[model.attributes[static_cast<std::size_t>(a)]] =
          tree.node(pred->node_id).text.value_or("");
    }
  }
  return out;
}

int load_word_vectors(const std::filesystem::path& path, const Vocab& vocab,
                      nn::Tensor<float>& table) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word vectors '" + path.string() + "'");
  const auto dim = static_cast<std::size_t>(table.cols());
  std::vector<bool> seen(static_cast<std::size_t>(table.rows()), false);
  int filled = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<float> values;
    float v = 0.0f;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) {
      throw FormatError(path.string() + ": non-numeric vector component", line_no);
    }
    if (values.size() != dim) {
      throw FormatError(path.string() + ": expected " + std::to_string(dim) +
                            " components, got " + std::to_string(values.size()),
                        line_no);
    }
    const int id = vocab.word_id(token);
    if (id <= kUnknownId || seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    std::copy(values.begin(), values.end(),
              table.value.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(id) * dim));
    ++filled;
  }
  return filled;
}

}  // namespace simpdom
