#include "gmgan/adam.hpp"

#include <cmath>

namespace gmgan {

AdamState::AdamState(const ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& [name, t] : params) {
    m_.emplace_back(name, Tensor::zeros(t.shape));
    v_.emplace_back(name, Tensor::zeros(t.shape));
  }
}

void AdamState::step(ParamStore& params) {
  if (params.size() != m_.size())
    throw UsageError("AdamState was built for a different parameter set");
  t_ += 1;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  size_t idx = 0;
  for (auto& [name, p] : params) {
    if (m_[idx].first != name)
      throw UsageError("AdamState parameter order mismatch at '" + name + "'");
    if (!p.grad) throw UsageError("gradient missing for parameter '" + name + "'");
    auto& m = m_[idx].second.v;
    auto& v = v_[idx].second.v;
    const auto& g = *p.grad;
    for (size_t i = 0; i < p.v.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.v[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    ++idx;
  }
  params.zero_grads();
}

void AdamState::restore(int64_t t, std::vector<std::pair<std::string, Tensor>> m,
                        std::vector<std::pair<std::string, Tensor>> v) {
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace gmgan
