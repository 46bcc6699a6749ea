#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "simpdom/neural/tensor.hpp"

namespace simpdom::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a ParamStore. Moments are created lazily (zero)
// per parameter name.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  long step_count() const { return t_; }

  void step(ParamStore<T>& params) {
    // Validate everything first so a bad gradient never leaves a
    // half-updated model behind.
    for (const auto& [name, tensor] : params.tensors()) {
      for (T g : tensor.grad) {
        if (!std::isfinite(g)) {
          throw OptimizerError("non-finite gradient in tensor '" + name + "'");
        }
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    for (auto& [name, tensor] : params.tensors()) {
      auto& slot = slots_[name];
      if (slot.m.size() != tensor.size()) {
        slot.m.assign(tensor.size(), T(0));
        slot.v.assign(tensor.size(), T(0));
      }
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        const T g = tensor.grad[i];
        slot.m[i] = b1 * slot.m[i] + (T(1) - b1) * g;
        slot.v[i] = b2 * slot.v[i] + (T(1) - b2) * g * g;
        if (slot.m[i] == T(0)) continue;
        const double m_hat = static_cast<double>(slot.m[i]) / c1;
        const double v_hat = static_cast<double>(slot.v[i]) / c2;
        tensor.value[i] -= static_cast<T>(config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps));
      }
    }
  }

  void reset() {
    t_ = 0;
    slots_.clear();
  }

 private:
  struct Slot {
    std::vector<T> m, v;
  };
  AdamConfig config_;
  long t_ = 0;
  std::map<std::string, Slot> slots_;
};

}  // namespace simpdom::nn
