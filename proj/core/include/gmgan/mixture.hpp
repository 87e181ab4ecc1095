#pragma once

#include <cstdint>
#include <vector>

#include "gmgan/mlp.hpp"
#include "gmgan/rng.hpp"
#include "gmgan/tape.hpp"
#include "gmgan/tensor.hpp"

namespace gmgan {

// Post-training covariance multiplier: sampling at scale s draws from
// N(mu_k, s * Sigma_k).
struct SigmaScale {
  double value = 1.0;
};

// K-component Gaussian mixture over the latent space. Component covariances
// are carried as factors A_k with Sigma_k = A_k A_k^T; the default is a
// per-component diagonal factor ([K x d]), with a full [K x d x d] factor
// behind a flag. In dynamic mode the means and factors are trainable.
class MixturePrior {
 public:
  // Means uniform on [-c, c]^d; covariance sigma_init * I for every
  // component (the factor diagonal is sqrt(sigma_init)); uniform weights.
  static MixturePrior init_static(int64_t K, int64_t d, double c, double sigma_init, Rng& rng,
                                  bool full_factor = false);

  int64_t components() const { return K_; }
  int64_t dim() const { return d_; }
  bool dynamic() const { return dynamic_; }
  bool full_factor() const { return full_factor_; }
  const std::vector<double>& weights() const { return alpha_; }

  void set_dynamic(bool on) { dynamic_ = on; }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const Tensor& means() const { return params_.get("mu"); }
  const Tensor& factors() const { return params_.get("factor"); }
  Tensor& means() { return params_.get("mu"); }
  Tensor& factors() { return params_.get("factor"); }

  // Implied covariance of component k, as a dense [d x d] matrix.
  Tensor covariance(int64_t k, SigmaScale scale = {}) const;

  int sample_component(Rng& rng) const;

  // One latent draw from component k (value path, no trace).
  Tensor sample_latent(int64_t k, SigmaScale scale, Rng& rng) const;

  // Batched reparameterized draw on a tape. In dynamic mode the mean and
  // factor tensors join the tape as parameters so gradients reach them; in
  // static mode they are constants. Draws eps ~ N(0, I) internally.
  Var sample_latent_batch(Tape& tape, const std::vector<int>& comps, SigmaScale scale, Rng& rng);

  // Value-path batched draw (used wherever no gradient is needed).
  Tensor sample_latent_batch(const std::vector<int>& comps, SigmaScale scale, Rng& rng) const;

  // Checkpoint plumbing.
  static MixturePrior from_parts(int64_t K, int64_t d, std::vector<double> alpha, Tensor mu,
                                 Tensor factor, bool dynamic);

 private:
  MixturePrior() = default;

  int64_t K_ = 0, d_ = 0;
  std::vector<double> alpha_;
  ParamStore params_;  // "mu" [K x d]; "factor" [K x d] or [K x d x d]
  bool dynamic_ = false;
  bool full_factor_ = false;
};

// log sum_m w_m N(x; mu_m, Sigma_m), log-sum-exp stabilized. Covariances are
// dense [d x d] and must be positive definite.
double mixture_log_density(const std::vector<Tensor>& means, const std::vector<Tensor>& covariances,
                           const std::vector<double>& weights, const Tensor& x);

// Gaussian log density with dense covariance (Cholesky).
double gaussian_log_density(const Tensor& mean, const Tensor& covariance, const Tensor& x);

}  // namespace gmgan
