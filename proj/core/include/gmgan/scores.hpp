#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmgan/classifier.hpp"
#include "gmgan/dataset.hpp"
#include "gmgan/mixture.hpp"
#include "gmgan/msssim.hpp"

namespace gmgan {

struct NnResult {
  int64_t index = -1;
  double distance = 0.0;
};

// Exact nearest neighbor of `query` among the rows of `train_features`
// (Euclidean); ties resolve to the lowest index.
NnResult nearest_neighbor(std::span<const double> query, const Tensor& train_features);

// q = a / (a + exp(dist)), the stable rearrangement of the quality formula;
// falls back to a * exp(-dist) once exp(dist) would overflow.
double quality_from_distance(double dist, double a);

// Per-sample and set quality against classifier features of the training
// set. `train_features` are rows of c_l(x') for the training set.
double quality(std::span<const double> x, const FeatureClassifier& clf,
               const Tensor& train_features, double a, int l = -1);
double quality_set(const Tensor& X, const FeatureClassifier& clf, const Tensor& train_features,
                   double a, int l = -1);

// Intra diversity: 1 - (1/|X|^2) * sum over all ordered pairs (self-pairs
// included) of clamped MS-SSIM. X rows are flattened images with the given
// geometry. Point data is not an image; callers with a Points dataset get a
// ModalityError from the dataset-aware overload.
double d_intra(const Tensor& X, int64_t h, int64_t w, int64_t ch, const MsSsimParams& p = {});
double d_intra(const Dataset& shape_source, const Tensor& X, const MsSsimParams& p = {});

// Inter diversity: entropy of the mean (hard argmax) one-hot prediction,
// normalized by log N. `soft` averages the softmax rows instead.
double d_inter_from_probs(const Tensor& probs, bool soft = false);
double d_inter(const Tensor& X, const FeatureClassifier& clf, bool soft = false);

double diversity(double intra, double inter);
double combined(double q, double d);

// exp(mean_x KL(p(y|x) || p(y))) with p(y) the batch-mean prediction.
double classifier_is_from_probs(const Tensor& probs);
double classifier_is(const Tensor& X, const FeatureClassifier& clf);

// Mean negative log density of rows of X under a known mixture.
double nll_under_mixture(const Tensor& X, const std::vector<Tensor>& means,
                         const std::vector<Tensor>& covariances,
                         const std::vector<double>& weights);

struct ScoreReport {
  double sigma_scale = 1.0;
  std::optional<double> q;
  std::optional<double> intra;
  std::optional<double> inter;
  std::optional<double> d;
  std::optional<double> s;
  std::optional<double> classifier_is;
  std::optional<double> nll;
  int64_t n_samples = 0;

  static std::string csv_header();  // sigma,q,d_intra,d_inter,d,s,is,nll,n_samples
  std::string csv_row() const;
};

}  // namespace gmgan
