#pragma once

// The node encoder and both classification heads.
//
//   e_x, e_p, e_f  shared word+char-CNN BiLSTM text encoder (2H each)
//   e_d            xpath BiLSTM (d_xpath) + leaf (d_leaf) + position (d_pos)
//                  + cosine(e_p, attribute embedding)
//   intra head     MLP([e_s; e_d]) -> M+1 logits
//   cross head     MLP([e_s; e_xpath; e_leaf; e_pos; e_a_i; cos(e_p, e_a_i)])
//                  -> one scalar per attribute row i = 0..M
//
// The cross head sees only its own attribute's cosine score, which keeps
// its weight shapes independent of M so a pretrained head transfers to a
// vertical with a different attribute count.

#include <map>
#include <string>
#include <span>
#include <vector>

#include "simpdom/config.hpp"
#include "simpdom/featurizer.hpp"
#include "simpdom/neural/layers.hpp"

namespace simpdom {

struct ModelShape {
  int words = 2;
  int chars = 2;
  int tags = 2;
  int attributes = 1;  // M, excluding none

  bool operator==(const ModelShape&) const = default;
};

template <typename T>
class NodeTagger {
 public:
  using Vec = nn::Vec<T>;
  using Mat = nn::Mat<T>;

  struct TextPass {
    bool empty = true;
    std::vector<int> word_ids;
    std::vector<std::vector<int>> char_ids;
    std::vector<nn::ConvCache<T>> convs;
    nn::BiLstmCache<T> lstm;
  };

  // Everything backward() needs from one forward pass.
  struct Pass {
    TextPass node, partner, friends;
    std::vector<int> xpath_ids;
    nn::BiLstmCache<T> xpath;
    int leaf_id = 0;
    int pos_row = 0;
    Vec e_p;
    Vec base;   // [e_x; e_p; e_f; e_xpath; e_leaf; e_pos]
    Vec e_cos;  // intra: M entries; cross: M+1 entries
    nn::MlpCache<T> intra;
    std::vector<nn::MlpCache<T>> cross;
  };

  // Freshly initialized parameters drawn from rng in name order.
  NodeTagger(const TrainConfig& config, const ModelShape& shape, nn::Rng& rng);
  // Wraps existing parameters; throws ConfigError on any shape mismatch.
  NodeTagger(const TrainConfig& config, const ModelShape& shape, nn::ParamStore<T> params);

  NodeTagger(const NodeTagger& other);
  NodeTagger& operator=(const NodeTagger& other);
  NodeTagger(NodeTagger&& other) noexcept;
  NodeTagger& operator=(NodeTagger&& other) noexcept;

  const TrainConfig& config() const { return config_; }
  const ModelShape& shape() const { return shape_; }
  int num_labels() const { return shape_.attributes + 1; }
  nn::ParamStore<T>& params() { return params_; }
  const nn::ParamStore<T>& params() const { return params_; }

  // Expected name -> shape of every parameter for a config and shape.
  static std::map<std::string, std::vector<std::size_t>> parameter_shapes(
      const TrainConfig& config, const ModelShape& shape);

  // Word+char encoder; an empty sequence encodes to the zero vector.
  Vec encode_text(std::span<const int> word_ids,
                  std::span<const std::vector<int>> char_ids,
                  TextPass* pass = nullptr) const;

  // [e_s; e_d] with e_cos over the M real attributes.
  Vec encode_node(const NodeFeatures& f, Pass* pass = nullptr) const;

  // M+1 logits under the configured head.
  Vec logits(const NodeFeatures& f, bool training, nn::Rng* rng, Pass* pass = nullptr) const;

  // Accumulates parameter gradients from d loss / d logits.
  void backward(const Pass& pass, const Vec& d_logits);

  // Forward + softmax cross-entropy + backward. Returns the loss.
  T loss_and_backward(const NodeFeatures& f, int label, bool training, nn::Rng* rng);

  // Replaces the attribute table with a fresh one of m_new+1 rows.
  void reset_attributes(int m_new, nn::Rng& rng);

 private:
  void bind();
  void encode_base(const NodeFeatures& f, Pass& pass) const;
  void text_backward(const TextPass& pass, const Vec& d_out);

  TrainConfig config_;
  ModelShape shape_;
  nn::ParamStore<T> params_;

  nn::Tensor<T>* word_emb_ = nullptr;
  nn::Tensor<T>* char_emb_ = nullptr;
  nn::Tensor<T>* cnn_filters_ = nullptr;
  nn::Tensor<T>* cnn_bias_ = nullptr;
  nn::BiLstmParams<T> text_lstm_;
  nn::Tensor<T>* xpath_emb_ = nullptr;
  nn::BiLstmParams<T> xpath_lstm_;
  nn::Tensor<T>* leaf_emb_ = nullptr;
  nn::Tensor<T>* pos_emb_ = nullptr;
  nn::Tensor<T>* attr_emb_ = nullptr;
  std::vector<nn::LinearParams<T>> head_;
};

extern template class NodeTagger<float>;
extern template class NodeTagger<double>;

}  // namespace simpdom
