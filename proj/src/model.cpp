#include "simpdom/model.hpp"

#include <utility>

#include "simpdom/errors.hpp"

namespace simpdom {

namespace {

std::size_t base_dim(const TrainConfig& c) {
  return static_cast<std::size_t>(3 * c.d_enc() + c.d_xpath + c.d_leaf + c.d_pos);
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename T>
void init_parameter(const std::string& name, nn::Tensor<T>& t, nn::Rng& rng) {
  if (name == "pos_emb" || name == "attr_emb") {
    nn::init_uniform(t, 0.1, rng);
  } else if (ends_with(name, "_emb")) {
    nn::init_embedding(t, rng);
  } else if (name == "char_cnn.filters") {
    const std::size_t f = t.shape[0], k = t.shape[1], d = t.shape[2];
    nn::init_xavier(t, k * d, f * k, rng);
  } else if (ends_with(name, ".wx") || ends_with(name, ".wh") || ends_with(name, ".weight")) {
    nn::init_xavier(t, static_cast<std::size_t>(t.cols()), static_cast<std::size_t>(t.rows()), rng);
  } else if (ends_with(name, "bilstm.fwd.bias") || ends_with(name, "bilstm.bwd.bias")) {
    // Gate order i, f, o, g: forget gate starts open.
    const std::size_t h = t.size() / 4;
    std::fill(t.value.begin(), t.value.end(), T(0));
    std::fill(t.value.begin() + static_cast<std::ptrdiff_t>(h),
              t.value.begin() + static_cast<std::ptrdiff_t>(2 * h), T(1));
  } else {
    std::fill(t.value.begin(), t.value.end(), T(0));
  }
}

}  // namespace

template <typename T>
std::map<std::string, std::vector<std::size_t>> NodeTagger<T>::parameter_shapes(
    const TrainConfig& c, const ModelShape& s) {
  using Dims = std::vector<std::size_t>;
  auto u = [](int v) { return static_cast<std::size_t>(v); };
  const std::size_t H = u(c.lstm_hidden);
  const std::size_t F = u(c.cnn_filters);
  const std::size_t Hx = u(c.d_xpath / 2);
  const std::size_t M = u(s.attributes);
  std::map<std::string, Dims> shapes;
  shapes["word_emb"] = {u(s.words), u(c.d_w)};
  shapes["char_emb"] = {u(s.chars), u(c.d_c)};
  shapes["char_cnn.filters"] = {F, u(c.kernel), u(c.d_c)};
  shapes["char_cnn.bias"] = {F};
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string text = std::string("text_bilstm.") + dir;
    shapes[text + ".wx"] = {4 * H, u(c.d_w) + F};
    shapes[text + ".wh"] = {4 * H, H};
    shapes[text + ".bias"] = {4 * H};
    const std::string xp = std::string("xpath_bilstm.") + dir;
    shapes[xp + ".wx"] = {4 * Hx, u(c.d_xpath)};
    shapes[xp + ".wh"] = {4 * Hx, Hx};
    shapes[xp + ".bias"] = {4 * Hx};
  }
  shapes["xpath_tag_emb"] = {u(s.tags), u(c.d_xpath)};
  shapes["leaf_emb"] = {u(s.tags), u(c.d_leaf)};
  shapes["pos_emb"] = {u(c.buckets), u(c.d_pos)};
  shapes["attr_emb"] = {M + 1, 2 * H};
  const std::size_t in = c.head == Head::kIntra ? base_dim(c) + M : base_dim(c) + 2 * H + 1;
  const std::size_t out = c.head == Head::kIntra ? M + 1 : 1;
  shapes["head.0.weight"] = {u(c.mlp_hidden), in};
  shapes["head.0.bias"] = {u(c.mlp_hidden)};
  shapes["head.1.weight"] = {out, u(c.mlp_hidden)};
  shapes["head.1.bias"] = {out};
  return shapes;
}

template <typename T>
NodeTagger<T>::NodeTagger(const TrainConfig& config, const ModelShape& shape, nn::Rng& rng)
    : config_(config), shape_(shape) {
  config_.validate();
  if (shape_.attributes < 1) throw ConfigError("model needs at least one attribute");
  for (auto& [name, dims] : parameter_shapes(config_, shape_)) params_.add(name, dims);
  for (auto& [name, tensor] : params_.tensors()) init_parameter(name, tensor, rng);
  bind();
}

template <typename T>
NodeTagger<T>::NodeTagger(const TrainConfig& config, const ModelShape& shape,
                          nn::ParamStore<T> params)
    : config_(config), shape_(shape), params_(std::move(params)) {
  config_.validate();
  auto expected = parameter_shapes(config_, shape_);
  if (expected.size() != params_.tensors().size()) {
    throw ConfigError("parameter set does not match the model configuration");
  }
  for (const auto& [name, dims] : expected) {
    if (!params_.contains(name) || params_.at(name).shape != dims) {
      throw ConfigError("parameter '" + name + "' missing or misshapen");
    }
  }
  bind();
}

template <typename T>
NodeTagger<T>::NodeTagger(const NodeTagger& other)
    : config_(other.config_), shape_(other.shape_), params_(other.params_) {
  bind();
}

template <typename T>
NodeTagger<T>& NodeTagger<T>::operator=(const NodeTagger& other) {
  if (this != &other) {
    config_ = other.config_;
    shape_ = other.shape_;
    params_ = other.params_;
    bind();
  }
  return *this;
}

template <typename T>
NodeTagger<T>::NodeTagger(NodeTagger&& other) noexcept
    : config_(std::move(other.config_)), shape_(other.shape_), params_(std::move(other.params_)) {
  bind();
}

template <typename T>
NodeTagger<T>& NodeTagger<T>::operator=(NodeTagger&& other) noexcept {
  if (this != &other) {
    config_ = std::move(other.config_);
    shape_ = other.shape_;
    params_ = std::move(other.params_);
    bind();
  }
  return *this;
}

template <typename T>
void NodeTagger<T>::bind() {
  auto lstm = [&](const std::string& prefix) {
    return nn::LstmParams<T>{&params_.at(prefix + ".wx"), &params_.at(prefix + ".wh"),
                             &params_.at(prefix + ".bias")};
  };
  word_emb_ = &params_.at("word_emb");
  char_emb_ = &params_.at("char_emb");
  cnn_filters_ = &params_.at("char_cnn.filters");
  cnn_bias_ = &params_.at("char_cnn.bias");
  text_lstm_ = {lstm("text_bilstm.fwd"), lstm("text_bilstm.bwd")};
  xpath_emb_ = &params_.at("xpath_tag_emb");
  xpath_lstm_ = {lstm("xpath_bilstm.fwd"), lstm("xpath_bilstm.bwd")};
  leaf_emb_ = &params_.at("leaf_emb");
  pos_emb_ = &params_.at("pos_emb");
  attr_emb_ = &params_.at("attr_emb");
  head_ = {{&params_.at("head.0.weight"), &params_.at("head.0.bias")},
           {&params_.at("head.1.weight"), &params_.at("head.1.bias")}};
}

template <typename T>
void NodeTagger<T>::reset_attributes(int m_new, nn::Rng& rng) {
  if (config_.head != Head::kCross) {
    throw IncompatibleHeadError("only the cross-vertical head can change its attribute set");
  }
  if (m_new < 1) throw ConfigError("model needs at least one attribute");
  shape_.attributes = m_new;
  nn::Tensor<T> table({static_cast<std::size_t>(m_new + 1),
                       static_cast<std::size_t>(config_.d_enc())});
  nn::init_uniform(table, 0.1, rng);
  params_.replace("attr_emb", std::move(table));
  bind();
}

template <typename T>
typename NodeTagger<T>::Vec NodeTagger<T>::encode_text(std::span<const int> word_ids,
                                                       std::span<const std::vector<int>> char_ids,
                                                       TextPass* pass) const {
  const auto H2 = static_cast<Eigen::Index>(config_.d_enc());
  if (word_ids.size() != char_ids.size()) {
    throw DimensionError("encode_text: word and char sequences differ in length");
  }
  if (pass) *pass = {};
  if (word_ids.empty()) return Vec::Zero(H2);

  const auto L = static_cast<Eigen::Index>(word_ids.size());
  const auto dw = static_cast<Eigen::Index>(config_.d_w);
  const auto F = static_cast<Eigen::Index>(config_.cnn_filters);
  Mat x(L, dw + F);
  x.leftCols(dw) = nn::embed(*word_emb_, word_ids);
  std::vector<nn::ConvCache<T>> convs(word_ids.size());
  static const std::vector<int> kPadOnly{kPadId};
  for (Eigen::Index i = 0; i < L; ++i) {
    const auto& chars = char_ids[static_cast<std::size_t>(i)].empty()
                            ? kPadOnly
                            : char_ids[static_cast<std::size_t>(i)];
    Mat c = nn::embed(*char_emb_, std::span<const int>(chars));
    x.block(i, dw, 1, F) =
        nn::conv_max(*cnn_filters_, *cnn_bias_, c, &convs[static_cast<std::size_t>(i)]).transpose();
  }
  Vec out = nn::bilstm(text_lstm_, x, pass ? &pass->lstm : nullptr);
  if (pass) {
    pass->empty = false;
    pass->word_ids.assign(word_ids.begin(), word_ids.end());
    pass->char_ids.assign(char_ids.begin(), char_ids.end());
    for (auto& ids : pass->char_ids) {
      if (ids.empty()) ids = kPadOnly;
    }
    pass->convs = std::move(convs);
  }
  return out;
}

template <typename T>
void NodeTagger<T>::text_backward(const TextPass& pass, const Vec& d_out) {
  if (pass.empty) return;
  const auto dw = static_cast<Eigen::Index>(config_.d_w);
  const auto F = static_cast<Eigen::Index>(config_.cnn_filters);
  Mat dx = nn::bilstm_backward(text_lstm_, pass.lstm, d_out);
  Mat d_words = dx.leftCols(dw);
  nn::embed_backward(*word_emb_, std::span<const int>(pass.word_ids), d_words);
  for (std::size_t i = 0; i < pass.word_ids.size(); ++i) {
    Vec d_hc = dx.block(static_cast<Eigen::Index>(i), dw, 1, F).transpose();
    Mat d_chars = nn::conv_max_backward(*cnn_filters_, *cnn_bias_, pass.convs[i], d_hc);
    nn::embed_backward(*char_emb_, std::span<const int>(pass.char_ids[i]), d_chars);
  }
}

template <typename T>
void NodeTagger<T>::encode_base(const NodeFeatures& f, Pass& pass) const {
  const auto H2 = static_cast<Eigen::Index>(config_.d_enc());
  Vec e_x = encode_text(f.node_word_ids, f.node_char_ids, &pass.node);
  Vec e_p = Vec::Zero(H2);
  Vec e_f = Vec::Zero(H2);
  pass.partner = {};
  pass.friends = {};
  if (config_.use_friend_circle) {
    e_p = encode_text(f.partner_word_ids, f.partner_char_ids, &pass.partner);
    e_f = encode_text(f.friends_word_ids, f.friends_char_ids, &pass.friends);
  }

  if (f.xpath_tag_ids.empty()) throw DimensionError("node features carry an empty xpath");
  pass.xpath_ids = f.xpath_tag_ids;
  Mat xp = nn::embed(*xpath_emb_, std::span<const int>(pass.xpath_ids));
  Vec e_xpath = nn::bilstm(xpath_lstm_, xp, &pass.xpath);

  if (f.leaf_tag_id < 0 || f.leaf_tag_id >= leaf_emb_->rows()) {
    throw IndexError("leaf tag id out of range");
  }
  if (f.position_bucket < 1 || f.position_bucket > pos_emb_->rows()) {
    throw IndexError("position bucket out of range");
  }
  pass.leaf_id = f.leaf_tag_id;
  pass.pos_row = f.position_bucket - 1;
  Vec e_leaf = pass.leaf_id == kPadId ? Vec::Zero(leaf_emb_->cols())
                                      : Vec(leaf_emb_->mat().row(pass.leaf_id).transpose());
  Vec e_pos = pos_emb_->mat().row(pass.pos_row).transpose();

  pass.base.resize(static_cast<Eigen::Index>(base_dim(config_)));
  pass.base << e_x, e_p, e_f, e_xpath, e_leaf, e_pos;
  pass.e_p = std::move(e_p);
}

template <typename T>
typename NodeTagger<T>::Vec NodeTagger<T>::encode_node(const NodeFeatures& f, Pass* pass) const {
  Pass local;
  Pass& p = pass ? *pass : local;
  encode_base(f, p);
  const auto M = static_cast<Eigen::Index>(shape_.attributes);
  p.e_cos = Vec::Zero(M);
  if (config_.use_friend_circle) {
    for (Eigen::Index i = 0; i < M; ++i) {
      p.e_cos(i) = nn::cosine<T>(p.e_p, attr_emb_->mat().row(i).transpose());
    }
  }
  Vec e_n(p.base.size() + M);
  e_n << p.base, p.e_cos;
  return e_n;
}

template <typename T>
typename NodeTagger<T>::Vec NodeTagger<T>::logits(const NodeFeatures& f, bool training,
                                                  nn::Rng* rng, Pass* pass) const {
  Pass local;
  Pass& p = pass ? *pass : local;
  std::span<const nn::LinearParams<T>> head(head_);
  if (config_.head == Head::kIntra) {
    Vec e_n = encode_node(f, &p);
    return nn::mlp(head, e_n, config_.dropout, training, rng, &p.intra);
  }

  encode_base(f, p);
  const auto rows = static_cast<Eigen::Index>(shape_.attributes + 1);
  const auto H2 = static_cast<Eigen::Index>(config_.d_enc());
  if (attr_emb_->rows() != rows) throw ConfigError("attribute table row count mismatch");
  p.e_cos = Vec::Zero(rows);
  p.cross.assign(static_cast<std::size_t>(rows), {});
  Vec h(rows);
  Vec input(p.base.size() + H2 + 1);
  input.head(p.base.size()) = p.base;
  for (Eigen::Index i = 0; i < rows; ++i) {
    Vec attr = attr_emb_->mat().row(i).transpose();
    if (config_.use_friend_circle) p.e_cos(i) = nn::cosine<T>(p.e_p, attr);
    input.segment(p.base.size(), H2) = attr;
    input(p.base.size() + H2) = p.e_cos(i);
    h(i) = nn::mlp(head, input, config_.dropout, training, rng,
                   &p.cross[static_cast<std::size_t>(i)])(0);
  }
  return h;
}

template <typename T>
void NodeTagger<T>::backward(const Pass& pass, const Vec& d_logits) {
  const auto H2 = static_cast<Eigen::Index>(config_.d_enc());
  const auto B = pass.base.size();
  std::span<nn::LinearParams<T>> head(head_);
  Vec d_base = Vec::Zero(B);
  Vec d_ep = Vec::Zero(H2);
  auto attr_grad = attr_emb_->grad_mat();

  auto cosine_into = [&](Eigen::Index row, T d_cos) {
    if (!config_.use_friend_circle) return;
    Vec attr = attr_emb_->mat().row(row).transpose();
    Vec d_attr = Vec::Zero(H2);
    nn::cosine_backward<T>(pass.e_p, attr, d_cos, d_ep, d_attr);
    attr_grad.row(row) += d_attr.transpose();
  };

  if (config_.head == Head::kIntra) {
    Vec d_en = nn::mlp_backward(head, pass.intra, d_logits);
    d_base = d_en.head(B);
    for (Eigen::Index i = 0; i < pass.e_cos.size(); ++i) cosine_into(i, d_en(B + i));
  } else {
    for (Eigen::Index i = 0; i < d_logits.size(); ++i) {
      Vec d_h(1);
      d_h(0) = d_logits(i);
      Vec d_in = nn::mlp_backward(head, pass.cross[static_cast<std::size_t>(i)], d_h);
      d_base += d_in.head(B);
      attr_grad.row(i) += d_in.segment(B, H2).transpose();
      cosine_into(i, d_in(B + H2));
    }
  }

  Eigen::Index off = 0;
  text_backward(pass.node, d_base.segment(off, H2));
  off += H2;
  if (config_.use_friend_circle) {
    d_ep += d_base.segment(off, H2);
    text_backward(pass.partner, d_ep);
    text_backward(pass.friends, d_base.segment(off + H2, H2));
  }
  off += 2 * H2;
  const auto dx = static_cast<Eigen::Index>(config_.d_xpath);
  Mat d_xp = nn::bilstm_backward(xpath_lstm_, pass.xpath, Vec(d_base.segment(off, dx)));
  nn::embed_backward(*xpath_emb_, std::span<const int>(pass.xpath_ids), d_xp);
  off += dx;
  const auto dl = static_cast<Eigen::Index>(config_.d_leaf);
  if (pass.leaf_id != kPadId) {
    leaf_emb_->grad_mat().row(pass.leaf_id) += d_base.segment(off, dl).transpose();
  }
  off += dl;
  const auto dp = static_cast<Eigen::Index>(config_.d_pos);
  pos_emb_->grad_mat().row(pass.pos_row) += d_base.segment(off, dp).transpose();
}

template <typename T>
T NodeTagger<T>::loss_and_backward(const NodeFeatures& f, int label, bool training,
                                   nn::Rng* rng) {
  Pass pass;
  Vec h = logits(f, training, rng, &pass);
  Vec p = nn::softmax(h);
  T loss = nn::cross_entropy(p, label);
  backward(pass, nn::softmax_cross_entropy_grad(p, label));
  return loss;
}

template class NodeTagger<float>;
template class NodeTagger<double>;

}  // namespace simpdom
