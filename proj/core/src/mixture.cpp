#include "gmgan/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gmgan {

MixturePrior MixturePrior::init_static(int64_t K, int64_t d, double c, double sigma_init, Rng& rng,
                                       bool full_factor) {
  if (K < 1) throw ParamError("mixture needs K >= 1 components");
  if (d < 1) throw ParamError("latent dimension must be >= 1");
  if (c < 0.0) throw ParamError("mean range c must be >= 0");
  if (!(sigma_init > 0.0)) throw ParamError("sigma_init must be > 0");

  MixturePrior p;
  p.K_ = K;
  p.d_ = d;
  p.alpha_.assign(static_cast<size_t>(K), 1.0 / static_cast<double>(K));
  p.full_factor_ = full_factor;

  Tensor mu = Tensor::zeros({K, d});
  for (double& x : mu.v) x = rng.uniform(-c, c);
  p.params_.add("mu", std::move(mu));

  const double root = std::sqrt(sigma_init);
  if (full_factor) {
    Tensor f = Tensor::zeros({K, d, d});
    for (int64_t k = 0; k < K; ++k)
      for (int64_t i = 0; i < d; ++i) f.v[static_cast<size_t>((k * d + i) * d + i)] = root;
    p.params_.add("factor", std::move(f));
  } else {
    p.params_.add("factor", Tensor::full({K, d}, root));
  }
  return p;
}

MixturePrior MixturePrior::from_parts(int64_t K, int64_t d, std::vector<double> alpha, Tensor mu,
                                      Tensor factor, bool dynamic) {
  MixturePrior p;
  p.K_ = K;
  p.d_ = d;
  p.alpha_ = std::move(alpha);
  p.full_factor_ = factor.rank() == 3;
  p.dynamic_ = dynamic;
  p.params_.add("mu", std::move(mu));
  p.params_.add("factor", std::move(factor));
  return p;
}

Tensor MixturePrior::covariance(int64_t k, SigmaScale scale) const {
  if (k < 0 || k >= K_) throw ParamError("component index out of range");
  const Tensor& f = factors();
  Tensor cov = Tensor::zeros({d_, d_});
  if (full_factor_) {
    const double* A = f.v.data() + k * d_ * d_;
    for (int64_t i = 0; i < d_; ++i)
      for (int64_t j = 0; j < d_; ++j) {
        double acc = 0.0;
        for (int64_t l = 0; l < d_; ++l) acc += A[i * d_ + l] * A[j * d_ + l];
        cov.v[static_cast<size_t>(i * d_ + j)] = scale.value * acc;
      }
  } else {
    const double* a = f.v.data() + k * d_;
    for (int64_t i = 0; i < d_; ++i)
      cov.v[static_cast<size_t>(i * d_ + i)] = scale.value * a[i] * a[i];
  }
  return cov;
}

int MixturePrior::sample_component(Rng& rng) const { return rng.categorical(alpha_); }

Tensor MixturePrior::sample_latent(int64_t k, SigmaScale scale, Rng& rng) const {
  if (k < 0 || k >= K_) throw ParamError("component index out of range");
  if (!(scale.value > 0.0)) throw ParamError("sigma scale must be > 0");
  const double root = std::sqrt(scale.value);
  const Tensor& mu = means();
  const Tensor& f = factors();
  Tensor z = Tensor::zeros({d_});
  if (full_factor_) {
    std::vector<double> eps(static_cast<size_t>(d_));
    for (double& e : eps) e = rng.normal();
    const double* A = f.v.data() + k * d_ * d_;
    for (int64_t r = 0; r < d_; ++r) {
      double acc = 0.0;
      for (int64_t c = 0; c < d_; ++c) acc += A[r * d_ + c] * eps[static_cast<size_t>(c)];
      z.v[static_cast<size_t>(r)] = root * acc + mu.v[static_cast<size_t>(k * d_ + r)];
    }
  } else {
    const double* a = f.v.data() + k * d_;
    for (int64_t j = 0; j < d_; ++j)
      z.v[static_cast<size_t>(j)] = root * a[j] * rng.normal() + mu.v[static_cast<size_t>(k * d_ + j)];
  }
  return z;
}

Var MixturePrior::sample_latent_batch(Tape& tape, const std::vector<int>& comps, SigmaScale scale,
                                      Rng& rng) {
  if (!(scale.value > 0.0)) throw ParamError("sigma scale must be > 0");
  const int64_t B = static_cast<int64_t>(comps.size());
  Tensor eps = Tensor::zeros({B, d_});
  for (double& e : eps.v) e = rng.normal();
  Var eps_v = tape.input(std::move(eps));
  Var mu_v = dynamic_ ? tape.param(means()) : tape.input(means());
  Var f_v = dynamic_ ? tape.param(factors()) : tape.input(factors());
  return tape.mixture_affine(eps_v, comps, mu_v, f_v, std::sqrt(scale.value));
}

Tensor MixturePrior::sample_latent_batch(const std::vector<int>& comps, SigmaScale scale,
                                         Rng& rng) const {
  if (!(scale.value > 0.0)) throw ParamError("sigma scale must be > 0");
  const int64_t B = static_cast<int64_t>(comps.size());
  const double root = std::sqrt(scale.value);
  const Tensor& mu = means();
  const Tensor& f = factors();
  Tensor z = Tensor::zeros({B, d_});
  for (int64_t i = 0; i < B; ++i) {
    const int k = comps[static_cast<size_t>(i)];
    if (k < 0 || k >= K_) throw ParamError("component index out of range");
    double* zi = z.v.data() + i * d_;
    if (full_factor_) {
      std::vector<double> eps(static_cast<size_t>(d_));
      for (double& e : eps) e = rng.normal();
      const double* A = f.v.data() + static_cast<int64_t>(k) * d_ * d_;
      for (int64_t r = 0; r < d_; ++r) {
        double acc = 0.0;
        for (int64_t c = 0; c < d_; ++c) acc += A[r * d_ + c] * eps[static_cast<size_t>(c)];
        zi[r] = root * acc + mu.v[static_cast<size_t>(k * d_ + r)];
      }
    } else {
      const double* a = f.v.data() + static_cast<int64_t>(k) * d_;
      for (int64_t j = 0; j < d_; ++j)
        zi[j] = root * a[j] * rng.normal() + mu.v[static_cast<size_t>(k * d_ + j)];
    }
  }
  return z;
}

namespace {

// Lower Cholesky factor; throws NumericError when not positive definite.
std::vector<double> cholesky(const Tensor& cov, int64_t d) {
  std::vector<double> L(static_cast<size_t>(d * d), 0.0);
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j <= i; ++j) {
      double s = cov.v[static_cast<size_t>(i * d + j)];
      for (int64_t k = 0; k < j; ++k)
        s -= L[static_cast<size_t>(i * d + k)] * L[static_cast<size_t>(j * d + k)];
      if (i == j) {
        if (s <= 0.0) throw NumericError("covariance is not positive definite");
        L[static_cast<size_t>(i * d + i)] = std::sqrt(s);
      } else {
        L[static_cast<size_t>(i * d + j)] = s / L[static_cast<size_t>(j * d + j)];
      }
    }
  }
  return L;
}

}  // namespace

double gaussian_log_density(const Tensor& mean, const Tensor& covariance, const Tensor& x) {
  const int64_t d = mean.size();
  if (x.size() != d) throw DimError("density point has wrong dimension");
  if (covariance.shape != std::vector<int64_t>{d, d})
    throw DimError("covariance must be [d x d]");
  const auto L = cholesky(covariance, d);
  // Solve L y = (x - mean); quadratic form is |y|^2, log|Sigma| = 2 sum log L_ii.
  std::vector<double> y(static_cast<size_t>(d));
  double logdet = 0.0;
  for (int64_t i = 0; i < d; ++i) {
    double s = x.v[static_cast<size_t>(i)] - mean.v[static_cast<size_t>(i)];
    for (int64_t k = 0; k < i; ++k) s -= L[static_cast<size_t>(i * d + k)] * y[static_cast<size_t>(k)];
    y[static_cast<size_t>(i)] = s / L[static_cast<size_t>(i * d + i)];
    logdet += 2.0 * std::log(L[static_cast<size_t>(i * d + i)]);
  }
  double quad = 0.0;
  for (double yi : y) quad += yi * yi;
  return -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

double mixture_log_density(const std::vector<Tensor>& means, const std::vector<Tensor>& covariances,
                           const std::vector<double>& weights, const Tensor& x) {
  const size_t M = means.size();
  if (covariances.size() != M || weights.size() != M)
    throw DimError("mixture components must agree in count");
  if (M == 0) throw ParamError("mixture needs at least one component");
  std::vector<double> terms(M);
  for (size_t m = 0; m < M; ++m) {
    if (weights[m] < 0.0) throw ParamError("mixture weights must be non-negative");
    terms[m] = weights[m] > 0.0
                   ? std::log(weights[m]) + gaussian_log_density(means[m], covariances[m], x)
                   : -std::numeric_limits<double>::infinity();
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(mx)) throw NumericError("mixture density underflowed everywhere");
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

}  // namespace gmgan
