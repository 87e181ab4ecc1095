#include "gmgan/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace gmgan {

Tensor softmax_rows(const Tensor& logits) {
  Tensor out = logits;
  const int64_t n = out.rows(), m = out.cols();
  for (int64_t i = 0; i < n; ++i) {
    double* row = out.v.data() + i * m;
    double mx = row[0];
    for (int64_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < m; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (int64_t j = 0; j < m; ++j) row[j] /= sum;
  }
  return out;
}

FeatureClassifier FeatureClassifier::train(const Dataset& data, const ClassifierConfig& cfg) {
  if (!data.labeled()) throw ParamError("classifier training requires labels");
  const int64_t N = data.n_classes();
  if (N < 2) throw ParamError("classifier training requires at least two classes");
  if (cfg.epochs < 0 || cfg.batch < 1) throw ParamError("bad classifier epochs/batch");

  FeatureClassifier clf;
  clf.n_classes_ = N;
  std::vector<int64_t> widths;
  widths.push_back(data.dim());
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(N);
  clf.spec_ = MlpSpec::make(std::move(widths), Act::Identity, cfg.leaky_slope);
  clf.feature_layer_ = cfg.feature_layer >= 0 ? cfg.feature_layer
                                              : static_cast<int>(clf.spec_.layers()) - 2;

  Rng rng(derive_seed(cfg.seed, "classifier"));
  init_mlp_params(clf.spec_, clf.params_, rng, cfg.weight_std);

  // Deterministic shuffled split: last holdout_frac of the permutation.
  const int64_t n = data.size();
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int64_t i = n - 1; i > 0; --i)
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_index(i + 1))]);
  const int64_t n_hold = std::min<int64_t>(n - 1, static_cast<int64_t>(std::floor(
                                                      cfg.holdout_frac * static_cast<double>(n))));
  const int64_t n_train = n - n_hold;

  const int64_t dim = data.dim();
  AdamState adam(clf.params_, cfg.adam);
  Tensor batch = Tensor::zeros({cfg.batch, dim});
  std::vector<int> batch_labels(static_cast<size_t>(cfg.batch));

  for (int64_t e = 0; e < cfg.epochs; ++e) {
    for (int64_t start = 0; start + cfg.batch <= n_train; start += cfg.batch) {
      for (int64_t j = 0; j < cfg.batch; ++j) {
        const int64_t idx = order[static_cast<size_t>(start + j)];
        std::memcpy(batch.v.data() + j * dim, data.samples().v.data() + idx * dim,
                    sizeof(double) * static_cast<size_t>(dim));
        batch_labels[static_cast<size_t>(j)] = data.label(idx);
      }
      Tape t;
      Var logits = mlp_apply(t, clf.spec_, clf.params_, t.input(batch));
      Var loss = t.neg(t.mean_all(t.gather_col(t.log_softmax(logits), batch_labels)));
      t.backward(loss);
      adam_step(clf.params_, adam);
    }
    // Reshuffle the training segment between epochs.
    for (int64_t i = n_train - 1; i > 0; --i)
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_index(i + 1))]);
  }

  // Held-out accuracy (training-set accuracy when no holdout).
  const int64_t n_eval = n_hold > 0 ? n_hold : n;
  const int64_t eval_base = n_hold > 0 ? n_train : 0;
  Tensor eval = Tensor::zeros({n_eval, dim});
  std::vector<int> eval_labels(static_cast<size_t>(n_eval));
  for (int64_t i = 0; i < n_eval; ++i) {
    const int64_t idx = order[static_cast<size_t>(eval_base + i)];
    std::memcpy(eval.v.data() + i * dim, data.samples().v.data() + idx * dim,
                sizeof(double) * static_cast<size_t>(dim));
    eval_labels[static_cast<size_t>(i)] = data.label(idx);
  }
  clf.holdout_accuracy_ = clf.accuracy(eval, eval_labels);
  return clf;
}

Tensor FeatureClassifier::probs(const Tensor& x) const {
  return softmax_rows(mlp_eval(spec_, params_, x));
}

std::vector<int> FeatureClassifier::predict(const Tensor& x) const {
  Tensor p = probs(x);
  std::vector<int> out(static_cast<size_t>(p.rows()));
  for (int64_t i = 0; i < p.rows(); ++i) {
    int best = 0;
    for (int64_t j = 1; j < p.cols(); ++j)
      if (p.at(i, j) > p.at(i, best)) best = static_cast<int>(j);
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

Tensor FeatureClassifier::features(const Tensor& x, int l) const {
  const int layer = l >= 0 ? l : feature_layer_;
  if (layer < 0 || layer >= spec_.layers())
    throw ParamError("feature layer index out of range");
  auto layers = mlp_eval_layers(spec_, params_, x);
  if (layer == spec_.layers() - 1) return softmax_rows(layers.back());
  return layers[static_cast<size_t>(layer)];
}

double FeatureClassifier::accuracy(const Tensor& x, const std::vector<int>& labels) const {
  if (static_cast<int64_t>(labels.size()) != x.rows())
    throw DimError("label count does not match batch");
  if (labels.empty()) return 0.0;
  const auto pred = predict(x);
  int64_t hits = 0;
  for (size_t i = 0; i < labels.size(); ++i)
    if (pred[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace gmgan
