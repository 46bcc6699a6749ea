#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "simpdom/errors.hpp"

namespace simpdom::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;
template <typename T>
using VecMap = Eigen::Map<Vec<T>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Vec<T>>;

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits; independent of the
// standard library's distribution implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// A named parameter: values plus a gradient buffer of the same shape.
// Row-major; the first dimension is the row count.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)),
        value(numel(shape), T(0)),
        grad(numel(shape), T(0)) {}

  static std::size_t numel(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t size() const { return value.size(); }
  Eigen::Index rows() const { return shape.empty() ? 1 : static_cast<Eigen::Index>(shape[0]); }
  Eigen::Index cols() const {
    return rows() == 0 ? 0 : static_cast<Eigen::Index>(size()) / rows();
  }

  MatMap<T> mat() { return MatMap<T>(value.data(), rows(), cols()); }
  ConstMatMap<T> mat() const { return ConstMatMap<T>(value.data(), rows(), cols()); }
  MatMap<T> grad_mat() { return MatMap<T>(grad.data(), rows(), cols()); }
  VecMap<T> vec() { return VecMap<T>(value.data(), static_cast<Eigen::Index>(size())); }
  ConstVecMap<T> vec() const {
    return ConstVecMap<T>(value.data(), static_cast<Eigen::Index>(size()));
  }
  VecMap<T> grad_vec() { return VecMap<T>(grad.data(), static_cast<Eigen::Index>(size())); }

  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// Name-sorted registry of every learnable tensor. Iteration order (and so
// every reduction over parameters) is deterministic.
template <typename T>
class ParamStore {
 public:
  using Map = std::map<std::string, Tensor<T>>;

  Tensor<T>& add(const std::string& name, std::vector<std::size_t> shape) {
    auto [it, inserted] = tensors_.try_emplace(name, std::move(shape));
    if (!inserted) throw ConfigError("duplicate parameter '" + name + "'");
    return it->second;
  }

  Tensor<T>& at(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw LookupError("unknown parameter '" + name + "'");
    return it->second;
  }
  const Tensor<T>& at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw LookupError("unknown parameter '" + name + "'");
    return it->second;
  }
  bool contains(const std::string& name) const { return tensors_.contains(name); }

  void replace(const std::string& name, Tensor<T> t) { at(name) = std::move(t); }

  Map& tensors() { return tensors_; }
  const Map& tensors() const { return tensors_; }

  void zero_grad() {
    for (auto& [_, t] : tensors_) t.zero_grad();
  }

  void scale_grad(T factor) {
    for (auto& [_, t] : tensors_) {
      for (auto& g : t.grad) g *= factor;
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tensors_) n += t.size();
    return n;
  }

  bool all_finite() const {
    for (const auto& [_, t] : tensors_) {
      for (T v : t.value) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

 private:
  Map tensors_;
};

template <typename T>
void init_uniform(Tensor<T>& t, double limit, Rng& rng) {
  for (auto& v : t.value) v = static_cast<T>(uniform(rng, -limit, limit));
}

template <typename T>
void init_xavier(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  init_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

// Embedding tables: uniform(-0.1, 0.1) with the padding row pinned at zero.
template <typename T>
void init_embedding(Tensor<T>& t, Rng& rng) {
  init_uniform(t, 0.1, rng);
  if (t.rows() > 0) t.mat().row(0).setZero();
}

// Converts between precisions, keeping names and shapes.
template <typename To, typename From>
ParamStore<To> cast_params(const ParamStore<From>& src) {
  ParamStore<To> dst;
  for (const auto& [name, t] : src.tensors()) {
    auto& d = dst.add(name, t.shape);
    for (std::size_t i = 0; i < t.size(); ++i) d.value[i] = static_cast<To>(t.value[i]);
  }
  return dst;
}

}  // namespace simpdom::nn
