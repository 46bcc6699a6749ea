#pragma once

// Forward/backward pairs for the fixed tagger architecture. Every backward
// accumulates (+=) into the parameter gradient buffers and returns the
// gradient with respect to its input.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "simpdom/neural/tensor.hpp"

namespace simpdom::nn {

// ---------------------------------------------------------------- embedding

// Gathers rows of `table`. Id 0 is the padding row and always reads zero.
template <typename T>
Mat<T> embed(const Tensor<T>& table, std::span<const int> ids) {
  const auto rows = table.rows();
  Mat<T> out(static_cast<Eigen::Index>(ids.size()), table.cols());
  auto m = table.mat();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= rows) {
      throw IndexError("embedding id " + std::to_string(ids[i]) +
                       " out of range [0, " + std::to_string(rows) + ")");
    }
    if (ids[i] == 0) {
      out.row(static_cast<Eigen::Index>(i)).setZero();
    } else {
      out.row(static_cast<Eigen::Index>(i)) = m.row(ids[i]);
    }
  }
  return out;
}

template <typename T>
void embed_backward(Tensor<T>& table, std::span<const int> ids, const Mat<T>& d_out) {
  auto g = table.grad_mat();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == 0) continue;
    g.row(ids[i]) += d_out.row(static_cast<Eigen::Index>(i));
  }
}

// ------------------------------------------------------- conv + max-pooling

template <typename T>
struct ConvCache {
  Mat<T> patches;          // L x (K*D), zero-padded windows
  std::vector<int> argmax; // per filter
};

// Same-padded 1-D convolution over time followed by max over time.
// filters: [F x K x D] (K odd), bias: [F], x: [L x D]. Returns [F].
template <typename T>
Vec<T> conv_max(const Tensor<T>& filters, const Tensor<T>& bias, const Mat<T>& x,
                ConvCache<T>* cache = nullptr) {
  if (filters.shape.size() != 3) throw DimensionError("conv filters must be [F x K x D]");
  const auto F = static_cast<Eigen::Index>(filters.shape[0]);
  const auto K = static_cast<Eigen::Index>(filters.shape[1]);
  const auto D = static_cast<Eigen::Index>(filters.shape[2]);
  if (x.cols() != D) throw DimensionError("conv input width mismatch");
  if (x.rows() < 1) throw DimensionError("conv input must have at least one step");
  const auto L = x.rows();
  const auto half = K / 2;

  Mat<T> patches = Mat<T>::Zero(L, K * D);
  for (Eigen::Index t = 0; t < L; ++t) {
    for (Eigen::Index j = 0; j < K; ++j) {
      auto src = t - half + j;
      if (src >= 0 && src < L) patches.block(t, j * D, 1, D) = x.row(src);
    }
  }
  ConstMatMap<T> w(filters.value.data(), F, K * D);
  Mat<T> conv = patches * w.transpose();
  conv.rowwise() += bias.vec().transpose();

  Vec<T> out(F);
  std::vector<int> argmax(static_cast<std::size_t>(F));
  for (Eigen::Index f = 0; f < F; ++f) {
    Eigen::Index best = 0;
    out(f) = conv.col(f).maxCoeff(&best);
    argmax[static_cast<std::size_t>(f)] = static_cast<int>(best);
  }
  if (cache) {
    cache->patches = std::move(patches);
    cache->argmax = std::move(argmax);
  }
  return out;
}

template <typename T>
Mat<T> conv_max_backward(Tensor<T>& filters, Tensor<T>& bias, const ConvCache<T>& cache,
                         const Vec<T>& d_out) {
  const auto F = static_cast<Eigen::Index>(filters.shape[0]);
  const auto K = static_cast<Eigen::Index>(filters.shape[1]);
  const auto D = static_cast<Eigen::Index>(filters.shape[2]);
  const auto L = cache.patches.rows();
  const auto half = K / 2;
  ConstMatMap<T> w(filters.value.data(), F, K * D);
  MatMap<T> dw(filters.grad.data(), F, K * D);

  Mat<T> d_patches = Mat<T>::Zero(L, K * D);
  for (Eigen::Index f = 0; f < F; ++f) {
    const auto t = cache.argmax[static_cast<std::size_t>(f)];
    dw.row(f) += d_out(f) * cache.patches.row(t);
    d_patches.row(t) += d_out(f) * w.row(f);
  }
  bias.grad_vec() += d_out;

  Mat<T> dx = Mat<T>::Zero(L, D);
  for (Eigen::Index t = 0; t < L; ++t) {
    for (Eigen::Index j = 0; j < K; ++j) {
      auto src = t - half + j;
      if (src >= 0 && src < L) dx.row(src) += d_patches.block(t, j * D, 1, D);
    }
  }
  return dx;
}

// --------------------------------------------------------------------- LSTM

template <typename T>
struct LstmParams {
  Tensor<T>* wx = nullptr;    // [4H x D], gate order i, f, o, g
  Tensor<T>* wh = nullptr;    // [4H x H]
  Tensor<T>* bias = nullptr;  // [4H]

  Eigen::Index hidden() const { return wh->cols(); }
};

template <typename T>
struct LstmCache {
  Mat<T> x;       // L x D
  Mat<T> gates;   // L x 4H, post-activation
  Mat<T> cell;    // L x H
  Mat<T> tanh_c;  // L x H
  Mat<T> h;       // L x H
};

template <typename T>
inline T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

// Runs the sequence front to back and returns the final hidden state.
template <typename T>
Vec<T> lstm(const LstmParams<T>& p, const Mat<T>& x, LstmCache<T>* cache = nullptr) {
  const auto H = p.hidden();
  const auto L = x.rows();
  if (x.cols() != p.wx->cols()) throw DimensionError("lstm input width mismatch");
  if (L < 1) throw DimensionError("lstm input must have at least one step");

  auto wx = std::as_const(*p.wx).mat();
  auto wh = std::as_const(*p.wh).mat();
  Mat<T> z = x * wx.transpose();
  z.rowwise() += std::as_const(*p.bias).vec().transpose();

  Mat<T> gates(L, 4 * H), cell(L, H), tanh_c(L, H), hs(L, H);
  Vec<T> h = Vec<T>::Zero(H), c = Vec<T>::Zero(H);
  for (Eigen::Index t = 0; t < L; ++t) {
    Vec<T> a = z.row(t).transpose() + wh * h;
    for (Eigen::Index j = 0; j < 3 * H; ++j) a(j) = sigmoid(a(j));
    for (Eigen::Index j = 3 * H; j < 4 * H; ++j) a(j) = std::tanh(a(j));
    c = a.segment(H, H).cwiseProduct(c) + a.segment(0, H).cwiseProduct(a.segment(3 * H, H));
    Vec<T> tc = c.array().tanh().matrix();
    h = a.segment(2 * H, H).cwiseProduct(tc);
    gates.row(t) = a.transpose();
    cell.row(t) = c.transpose();
    tanh_c.row(t) = tc.transpose();
    hs.row(t) = h.transpose();
  }
  if (cache) {
    cache->x = x;
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->tanh_c = std::move(tanh_c);
    cache->h = std::move(hs);
  }
  return h;
}

// Backpropagation through time from a gradient on the final hidden state.
template <typename T>
Mat<T> lstm_backward(LstmParams<T>& p, const LstmCache<T>& cache, const Vec<T>& d_h_final) {
  const auto H = p.hidden();
  const auto L = cache.x.rows();
  auto wx = std::as_const(*p.wx).mat();
  auto wh = std::as_const(*p.wh).mat();

  Mat<T> dz(L, 4 * H);
  Vec<T> dh = d_h_final;
  Vec<T> dc = Vec<T>::Zero(H);
  for (Eigen::Index t = L - 1; t >= 0; --t) {
    auto a = cache.gates.row(t).transpose();
    auto gi = a.segment(0, H).array();
    auto gf = a.segment(H, H).array();
    auto go = a.segment(2 * H, H).array();
    auto gg = a.segment(3 * H, H).array();
    auto tc = cache.tanh_c.row(t).transpose().array();
    Vec<T> c_prev = t > 0 ? Vec<T>(cache.cell.row(t - 1).transpose()) : Vec<T>::Zero(H);

    Vec<T> d_o = (dh.array() * tc).matrix();
    dc.array() += dh.array() * go * (T(1) - tc * tc);
    Vec<T> d_i = (dc.array() * gg).matrix();
    Vec<T> d_g = (dc.array() * gi).matrix();
    Vec<T> d_f = (dc.array() * c_prev.array()).matrix();

    dz.block(t, 0, 1, H) = (d_i.array() * gi * (T(1) - gi)).matrix().transpose();
    dz.block(t, H, 1, H) = (d_f.array() * gf * (T(1) - gf)).matrix().transpose();
    dz.block(t, 2 * H, 1, H) = (d_o.array() * go * (T(1) - go)).matrix().transpose();
    dz.block(t, 3 * H, 1, H) = (d_g.array() * (T(1) - gg * gg)).matrix().transpose();

    dc = (dc.array() * gf).matrix();
    Vec<T> dzt = dz.row(t).transpose();
    if (t > 0) p.wh->grad_mat() += dzt * cache.h.row(t - 1);
    dh = wh.transpose() * dzt;
  }
  p.wx->grad_mat() += dz.transpose() * cache.x;
  p.bias->grad_vec() += dz.colwise().sum().transpose();
  return dz * wx;
}

template <typename T>
struct BiLstmParams {
  LstmParams<T> fwd;
  LstmParams<T> bwd;
};

template <typename T>
struct BiLstmCache {
  LstmCache<T> fwd;
  LstmCache<T> bwd;
};

// [final forward state; final backward state], each of size H.
template <typename T>
Vec<T> bilstm(const BiLstmParams<T>& p, const Mat<T>& x, BiLstmCache<T>* cache = nullptr) {
  const auto H = p.fwd.hidden();
  Vec<T> out(2 * H);
  out.head(H) = lstm(p.fwd, x, cache ? &cache->fwd : nullptr);
  Mat<T> rev = x.colwise().reverse();
  out.tail(H) = lstm(p.bwd, rev, cache ? &cache->bwd : nullptr);
  return out;
}

template <typename T>
Mat<T> bilstm_backward(BiLstmParams<T>& p, const BiLstmCache<T>& cache, const Vec<T>& d_out) {
  const auto H = p.fwd.hidden();
  Mat<T> dx = lstm_backward(p.fwd, cache.fwd, Vec<T>(d_out.head(H)));
  Mat<T> dx_rev = lstm_backward(p.bwd, cache.bwd, Vec<T>(d_out.tail(H)));
  dx += dx_rev.colwise().reverse();
  return dx;
}

// ------------------------------------------------------------------ dropout

// Inverted dropout: in training, zeroes each entry with probability `rate`
// and scales survivors by 1/(1-rate). Identity in inference. The applied
// mask (already scaled) is written to `mask` when given.
template <typename T>
Vec<T> dropout(const Vec<T>& x, double rate, bool training, Rng* rng, Vec<T>* mask = nullptr) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) {
    if (mask) *mask = Vec<T>::Ones(x.size());
    return x;
  }
  if (!rng) throw ArgumentError("dropout in training needs a generator");
  Vec<T> m(x.size());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m(i) = uniform01(*rng) < rate ? T(0) : keep_scale;
  }
  Vec<T> out = x.cwiseProduct(m);
  if (mask) *mask = std::move(m);
  return out;
}

// ---------------------------------------------------------------------- MLP

template <typename T>
struct LinearParams {
  Tensor<T>* weight = nullptr;  // [out x in]
  Tensor<T>* bias = nullptr;    // [out]
};

template <typename T>
struct MlpCache {
  std::vector<Vec<T>> inputs;  // input of each layer
  std::vector<Vec<T>> pre;     // pre-activation of each hidden layer
  std::vector<Vec<T>> masks;   // dropout mask of each hidden layer
};

// affine -> ReLU -> dropout for every layer but the last, which is affine.
template <typename T>
Vec<T> mlp(std::span<const LinearParams<T>> layers, const Vec<T>& x, double rate,
           bool training, Rng* rng, MlpCache<T>* cache = nullptr) {
  Vec<T> cur = x;
  if (cache) *cache = {};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto w = std::as_const(*layers[i].weight).mat();
    if (w.cols() != cur.size()) {
      throw DimensionError("mlp layer " + std::to_string(i) + " expects " +
                           std::to_string(w.cols()) + " inputs, got " +
                           std::to_string(cur.size()));
    }
    if (cache) cache->inputs.push_back(cur);
    Vec<T> z = w * cur + std::as_const(*layers[i].bias).vec();
    if (i + 1 == layers.size()) return z;
    Vec<T> mask;
    Vec<T> act = z.cwiseMax(T(0));
    cur = dropout(act, rate, training, rng, &mask);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->masks.push_back(std::move(mask));
    }
  }
  return cur;
}

template <typename T>
Vec<T> mlp_backward(std::span<LinearParams<T>> layers, const MlpCache<T>& cache,
                    const Vec<T>& d_out) {
  Vec<T> d = d_out;
  for (std::size_t i = layers.size(); i-- > 0;) {
    if (i + 1 < layers.size()) {
      d = d.cwiseProduct(cache.masks[i]);
      for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (cache.pre[i](j) <= T(0)) d(j) = T(0);
      }
    }
    layers[i].weight->grad_mat() += d * cache.inputs[i].transpose();
    layers[i].bias->grad_vec() += d;
    d = std::as_const(*layers[i].weight).mat().transpose() * d;
  }
  return d;
}

// ------------------------------------------------------- similarity & loss

inline constexpr double kCosineNormFloor = 1e-12;

// a.b / (|a||b|); 0 when either norm is below 1e-12.
template <typename T>
T cosine(const Vec<T>& a, const Vec<T>& b) {
  if (a.size() != b.size()) throw DimensionError("cosine: length mismatch");
  const T na = a.norm();
  const T nb = b.norm();
  if (na < T(kCosineNormFloor) || nb < T(kCosineNormFloor)) return T(0);
  return a.dot(b) / (na * nb);
}

template <typename T>
void cosine_backward(const Vec<T>& a, const Vec<T>& b, T d_c, Vec<T>& d_a, Vec<T>& d_b) {
  const T na = a.norm();
  const T nb = b.norm();
  if (na < T(kCosineNormFloor) || nb < T(kCosineNormFloor)) return;
  const T c = a.dot(b) / (na * nb);
  d_a += d_c * (b / (na * nb) - c * a / (na * na));
  d_b += d_c * (a / (na * nb) - c * b / (nb * nb));
}

template <typename T>
Vec<T> softmax(const Vec<T>& h) {
  Vec<T> p = (h.array() - h.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

inline constexpr double kLogClamp = 1e-12;

// -log p[label], with p clamped at 1e-12.
template <typename T>
T cross_entropy(const Vec<T>& p, int label) {
  if (label < 0 || label >= p.size()) throw IndexError("cross_entropy: label out of range");
  return -std::log(std::max(p(label), T(kLogClamp)));
}

// d loss / d logits for softmax followed by cross-entropy: p - onehot(label).
template <typename T>
Vec<T> softmax_cross_entropy_grad(const Vec<T>& p, int label) {
  Vec<T> g = p;
  g(label) -= T(1);
  return g;
}

}  // namespace simpdom::nn
