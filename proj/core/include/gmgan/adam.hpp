#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gmgan/mlp.hpp"
#include "gmgan/tensor.hpp"

namespace gmgan {

struct AdamConfig {
  double lr = 2e-4;  // the training loop's learning rate
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every tensor in a ParamStore. Moment buffers
// mirror the store's iteration order; t counts completed steps.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParamStore& params, AdamConfig cfg);

  // One update. Requires every parameter to carry a gradient; clears all
  // gradients afterwards.
  void step(ParamStore& params);

  int64_t t() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  // Checkpoint plumbing.
  const std::vector<std::pair<std::string, Tensor>>& moments1() const { return m_; }
  const std::vector<std::pair<std::string, Tensor>>& moments2() const { return v_; }
  void restore(int64_t t, std::vector<std::pair<std::string, Tensor>> m,
               std::vector<std::pair<std::string, Tensor>> v);

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::vector<std::pair<std::string, Tensor>> m_, v_;
};

// Spec-shaped entry point.
inline void adam_step(ParamStore& params, AdamState& state) { state.step(params); }

}  // namespace gmgan
