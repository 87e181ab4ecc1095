#pragma once

#include <cstdint>
#include <vector>

#include "gmgan/adam.hpp"
#include "gmgan/dataset.hpp"
#include "gmgan/mlp.hpp"

namespace gmgan {

struct ClassifierConfig {
  std::vector<int64_t> hidden{64, 64};
  int64_t epochs = 20;
  int64_t batch = 64;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8};
  double weight_std = 0.05;
  double leaky_slope = 0.2;
  double holdout_frac = 0.1;
  uint64_t seed = 1;
  int feature_layer = -1;  // -1 = penultimate
};

// Softmax MLP trained on the GAN's own training set; supplies features for
// the quality score and predictions for the diversity/IS scores.
class FeatureClassifier {
 public:
  static FeatureClassifier train(const Dataset& data, const ClassifierConfig& cfg);

  int64_t n_classes() const { return n_classes_; }
  double holdout_accuracy() const { return holdout_accuracy_; }
  int default_feature_layer() const { return feature_layer_; }
  const MlpSpec& spec() const { return spec_; }
  const ParamStore& params() const { return params_; }

  // Softmax class probabilities, [B x N].
  Tensor probs(const Tensor& x) const;
  // Hard predictions (argmax, lowest index on ties).
  std::vector<int> predict(const Tensor& x) const;
  // Activations of layer l (post-activation). The final layer returns the
  // softmax probabilities. l = -1 selects the configured default.
  Tensor features(const Tensor& x, int l = -1) const;

  double accuracy(const Tensor& x, const std::vector<int>& labels) const;

 private:
  MlpSpec spec_;
  ParamStore params_;
  int64_t n_classes_ = 0;
  int feature_layer_ = 0;
  double holdout_accuracy_ = 0.0;
};

// Row-wise softmax of logits.
Tensor softmax_rows(const Tensor& logits);

}  // namespace gmgan
