#include "gmgan/scores.hpp"

#include <algorithm>
#include <cmath>

#include "gmgan/fmt.hpp"

namespace gmgan {

NnResult nearest_neighbor(std::span<const double> query, const Tensor& train_features) {
  const int64_t n = train_features.rows();
  const int64_t f = train_features.cols();
  if (n == 0) throw ParamError("nearest_neighbor requires a non-empty feature set");
  if (static_cast<int64_t>(query.size()) != f)
    throw DimError("query width does not match feature width");
  NnResult best{-1, 0.0};
  double best_sq = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double* row = train_features.v.data() + i * f;
    double sq = 0.0;
    for (int64_t j = 0; j < f; ++j) {
      const double diff = query[static_cast<size_t>(j)] - row[j];
      sq += diff * diff;
    }
    if (best.index < 0 || sq < best_sq) {
      best_sq = sq;
      best.index = i;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

double quality_from_distance(double dist, double a) {
  if (!(a > 0.0)) throw ParamError("quality constant a must be > 0");
  if (dist < 0.0) throw ParamError("distance must be >= 0");
  if (dist > 700.0) return a * std::exp(-dist);
  return a / (a + std::exp(dist));
}

double quality(std::span<const double> x, const FeatureClassifier& clf,
               const Tensor& train_features, double a, int l) {
  Tensor one({1, static_cast<int64_t>(x.size())}, std::vector<double>(x.begin(), x.end()));
  Tensor feat = clf.features(one, l);
  const NnResult nn = nearest_neighbor(
      std::span<const double>(feat.v.data(), static_cast<size_t>(feat.cols())), train_features);
  return quality_from_distance(nn.distance, a);
}

double quality_set(const Tensor& X, const FeatureClassifier& clf, const Tensor& train_features,
                   double a, int l) {
  const int64_t n = X.rows();
  if (n < 1) throw ParamError("quality_set requires at least one sample");
  Tensor feats = clf.features(X, l);
  double sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const NnResult nn = nearest_neighbor(
        std::span<const double>(feats.v.data() + i * feats.cols(),
                                static_cast<size_t>(feats.cols())),
        train_features);
    sum += quality_from_distance(nn.distance, a);
  }
  return sum / static_cast<double>(n);
}

double d_intra(const Tensor& X, int64_t h, int64_t w, int64_t ch, const MsSsimParams& p) {
  const int64_t n = X.rows();
  if (n < 1) throw ParamError("d_intra requires at least one image");
  if (X.cols() != h * w * ch) throw DimError("image geometry does not match row width");
  auto image = [&](int64_t i) {
    Tensor img = Tensor::zeros(ch == 1 ? std::vector<int64_t>{h, w} : std::vector<int64_t>{h, w, ch});
    std::copy(X.v.begin() + i * X.cols(), X.v.begin() + (i + 1) * X.cols(), img.v.begin());
    return img;
  };
  std::vector<Tensor> imgs;
  imgs.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) imgs.push_back(image(i));
  // The double sum runs over ordered pairs including self-pairs; symmetry
  // halves the off-diagonal work, self-pairs contribute exactly 1 each.
  double total = static_cast<double>(n);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = i + 1; j < n; ++j) total += 2.0 * ms_ssim(imgs[static_cast<size_t>(i)],
                                                               imgs[static_cast<size_t>(j)], p);
  return 1.0 - total / (static_cast<double>(n) * static_cast<double>(n));
}

double d_intra(const Dataset& shape_source, const Tensor& X, const MsSsimParams& p) {
  if (shape_source.modality() != Modality::Images)
    throw ModalityError("d_intra is defined for image data only");
  return d_intra(X, shape_source.height(), shape_source.width(), shape_source.channels(), p);
}

double d_inter_from_probs(const Tensor& probs, bool soft) {
  const int64_t n = probs.rows(), N = probs.cols();
  if (N < 2) throw ParamError("d_inter requires at least two classes");
  if (n < 1) throw ParamError("d_inter requires at least one sample");
  std::vector<double> mean(static_cast<size_t>(N), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    if (soft) {
      for (int64_t j = 0; j < N; ++j) mean[static_cast<size_t>(j)] += probs.at(i, j);
    } else {
      int best = 0;
      for (int64_t j = 1; j < N; ++j)
        if (probs.at(i, j) > probs.at(i, best)) best = static_cast<int>(j);
      mean[static_cast<size_t>(best)] += 1.0;
    }
  }
  double entropy = 0.0;
  for (double& m : mean) {
    m /= static_cast<double>(n);
    if (m > 0.0) entropy -= m * std::log(m);
  }
  return entropy / std::log(static_cast<double>(N));
}

double d_inter(const Tensor& X, const FeatureClassifier& clf, bool soft) {
  return d_inter_from_probs(clf.probs(X), soft);
}

double diversity(double intra, double inter) {
  if (intra < 0.0 || inter < 0.0) throw ParamError("diversity factors must be >= 0");
  return std::sqrt(intra * inter);
}

double combined(double q, double d) {
  if (q < 0.0 || d < 0.0) throw ParamError("combined factors must be >= 0");
  return std::sqrt(q * d);
}

double classifier_is_from_probs(const Tensor& probs) {
  const int64_t n = probs.rows(), N = probs.cols();
  if (n < 2) throw ParamError("classifier_is requires at least two samples");
  std::vector<double> marginal(static_cast<size_t>(N), 0.0);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < N; ++j) marginal[static_cast<size_t>(j)] += probs.at(i, j);
  for (double& m : marginal) m /= static_cast<double>(n);
  // KL with the p log p -> 0 convention at p = 0; the marginal is clamped
  // away from zero in the denominator only.
  double mean_kl = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double kl = 0.0;
    for (int64_t j = 0; j < N; ++j) {
      const double p = probs.at(i, j);
      if (p > 0.0) kl += p * (std::log(p) - std::log(std::max(marginal[static_cast<size_t>(j)], 1e-300)));
    }
    mean_kl += kl;
  }
  mean_kl /= static_cast<double>(n);
  return std::exp(mean_kl);
}

double classifier_is(const Tensor& X, const FeatureClassifier& clf) {
  return classifier_is_from_probs(clf.probs(X));
}

double nll_under_mixture(const Tensor& X, const std::vector<Tensor>& means,
                         const std::vector<Tensor>& covariances,
                         const std::vector<double>& weights) {
  const int64_t n = X.rows();
  if (n < 1) throw ParamError("nll_under_mixture requires at least one sample");
  double sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    Tensor x({X.cols()}, std::vector<double>(X.v.begin() + i * X.cols(),
                                             X.v.begin() + (i + 1) * X.cols()));
    sum += mixture_log_density(means, covariances, weights, x);
  }
  return -sum / static_cast<double>(n);
}

std::string ScoreReport::csv_header() { return "sigma,q,d_intra,d_inter,d,s,is,nll,n_samples"; }

namespace {
std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }
}  // namespace

std::string ScoreReport::csv_row() const {
  std::string out = format_double(sigma_scale);
  out += ',';
  out += cell(q);
  out += ',';
  out += cell(intra);
  out += ',';
  out += cell(inter);
  out += ',';
  out += cell(d);
  out += ',';
  out += cell(s);
  out += ',';
  out += cell(classifier_is);
  out += ',';
  out += cell(nll);
  out += ',';
  out += std::to_string(n_samples);
  return out;
}

}  // namespace gmgan
