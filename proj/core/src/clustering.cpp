#include "gmgan/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gmgan {

int64_t ContingencyTable::total() const {
  int64_t t = 0;
  for (int64_t c : counts) t += c;
  return t;
}

ContingencyTable ContingencyTable::build(const std::vector<int>& true_labels,
                                         const std::vector<int>& cluster_ids, int64_t n_true,
                                         int64_t n_cluster) {
  if (true_labels.size() != cluster_ids.size())
    throw DimError("label and cluster vectors differ in length");
  ContingencyTable t;
  t.n_true = n_true;
  t.n_cluster = n_cluster;
  t.counts.assign(static_cast<size_t>(n_true * n_cluster), 0);
  for (size_t i = 0; i < true_labels.size(); ++i) {
    const int y = true_labels[i], c = cluster_ids[i];
    if (y < 0 || y >= n_true) throw ParamError("true label out of range");
    if (c < 0 || c >= n_cluster) throw ParamError("cluster id out of range");
    ++t.counts[static_cast<size_t>(y * n_cluster + c)];
  }
  return t;
}

namespace {

// Zero-padded square view of the table, side max(n_true, n_cluster).
std::vector<int64_t> padded_square(const ContingencyTable& t, int64_t& side) {
  side = std::max(t.n_true, t.n_cluster);
  std::vector<int64_t> sq(static_cast<size_t>(side * side), 0);
  for (int64_t y = 0; y < t.n_true; ++y)
    for (int64_t c = 0; c < t.n_cluster; ++c)
      sq[static_cast<size_t>(y * side + c)] = t.at(y, c);
  return sq;
}

// Min-cost perfect assignment via the potentials form of the Hungarian
// algorithm; O(side^3). Returns row assigned to each column.
std::vector<int> hungarian_min_cost(const std::vector<double>& cost, int64_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n + 1), 0.0), v(static_cast<size_t>(n + 1), 0.0);
  std::vector<int> p(static_cast<size_t>(n + 1), 0), way(static_cast<size_t>(n + 1), 0);
  for (int64_t i = 1; i <= n; ++i) {
    p[0] = static_cast<int>(i);
    int64_t j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n + 1), inf);
    std::vector<char> used(static_cast<size_t>(n + 1), 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int64_t i0 = p[static_cast<size_t>(j0)];
      double delta = inf;
      int64_t j1 = -1;
      for (int64_t j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost[static_cast<size_t>((i0 - 1) * n + (j - 1))] -
                           u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = static_cast<int>(j0);
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int64_t j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int64_t j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_of_col(static_cast<size_t>(n));
  for (int64_t j = 1; j <= n; ++j)
    row_of_col[static_cast<size_t>(j - 1)] = p[static_cast<size_t>(j)] - 1;
  return row_of_col;
}

std::vector<int> assignment_permutation(const ContingencyTable& t) {
  int64_t side = 0;
  const auto sq = padded_square(t, side);
  std::vector<double> cost(sq.size());
  for (size_t i = 0; i < sq.size(); ++i) cost[i] = -static_cast<double>(sq[i]);
  return hungarian_min_cost(cost, side);
}

}  // namespace

double acc_brute_force(const ContingencyTable& t) {
  int64_t side = 0;
  const auto sq = padded_square(t, side);
  if (side > 8) throw ParamError("brute-force accuracy limited to side <= 8");
  std::vector<int> perm(static_cast<size_t>(side));
  std::iota(perm.begin(), perm.end(), 0);
  int64_t best = 0;
  do {
    int64_t hits = 0;
    for (int64_t c = 0; c < side; ++c)
      hits += sq[static_cast<size_t>(perm[static_cast<size_t>(c)] * side + c)];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const int64_t total = t.total();
  if (total == 0) throw ParamError("empty contingency table");
  return static_cast<double>(best) / static_cast<double>(total);
}

double acc_assignment(const ContingencyTable& t) {
  int64_t side = 0;
  const auto sq = padded_square(t, side);
  const auto row_of_col = assignment_permutation(t);
  int64_t hits = 0;
  for (int64_t c = 0; c < side; ++c)
    hits += sq[static_cast<size_t>(static_cast<int64_t>(row_of_col[static_cast<size_t>(c)]) * side + c)];
  const int64_t total = t.total();
  if (total == 0) throw ParamError("empty contingency table");
  return static_cast<double>(hits) / static_cast<double>(total);
}

double acc(const std::vector<int>& true_labels, const std::vector<int>& cluster_ids, int64_t N,
           int64_t K, std::vector<int>* permutation) {
  const ContingencyTable t = ContingencyTable::build(true_labels, cluster_ids, N, K);
  if (permutation) *permutation = assignment_permutation(t);
  if (std::max(N, K) <= 8) return acc_brute_force(t);
  return acc_assignment(t);
}

double nmi(const std::vector<int>& true_labels, const std::vector<int>& cluster_ids) {
  if (true_labels.size() != cluster_ids.size())
    throw DimError("label and cluster vectors differ in length");
  if (true_labels.empty()) throw ParamError("nmi requires at least one sample");
  const int64_t N = 1 + *std::max_element(true_labels.begin(), true_labels.end());
  const int64_t K = 1 + *std::max_element(cluster_ids.begin(), cluster_ids.end());
  const ContingencyTable t = ContingencyTable::build(true_labels, cluster_ids, N, K);
  const double n = static_cast<double>(t.total());

  std::vector<double> py(static_cast<size_t>(N), 0.0), pc(static_cast<size_t>(K), 0.0);
  for (int64_t y = 0; y < N; ++y)
    for (int64_t c = 0; c < K; ++c) {
      py[static_cast<size_t>(y)] += static_cast<double>(t.at(y, c));
      pc[static_cast<size_t>(c)] += static_cast<double>(t.at(y, c));
    }
  double hy = 0.0, hc = 0.0;
  for (double& p : py) {
    p /= n;
    if (p > 0.0) hy -= p * std::log(p);
  }
  for (double& p : pc) {
    p /= n;
    if (p > 0.0) hc -= p * std::log(p);
  }
  if (hy == 0.0 || hc == 0.0) return (hy == 0.0 && hc == 0.0) ? 1.0 : 0.0;

  double mi = 0.0;
  for (int64_t y = 0; y < N; ++y)
    for (int64_t c = 0; c < K; ++c) {
      const double joint = static_cast<double>(t.at(y, c)) / n;
      if (joint > 0.0)
        mi += joint * std::log(joint / (py[static_cast<size_t>(y)] * pc[static_cast<size_t>(c)]));
    }
  return mi / std::sqrt(hy * hc);
}

Dataset generate_labeled_synthetic(const GanModel& model, const MixturePrior& prior, int64_t M,
                                   Rng& rng) {
  if (M < 1) throw ParamError("need at least one sample per component");
  const int64_t K = prior.components();
  const int64_t n = K * M;
  Tensor samples = Tensor::zeros({n, model.data_dim()});
  std::vector<int> labels(static_cast<size_t>(n));
  for (int64_t k = 0; k < K; ++k) {
    std::vector<int> comps(static_cast<size_t>(M), static_cast<int>(k));
    Tensor z = prior.sample_latent_batch(comps, SigmaScale{1.0}, rng);
    Tensor x = generate(model, z);
    std::copy(x.v.begin(), x.v.end(), samples.v.begin() + k * M * model.data_dim());
    std::fill(labels.begin() + static_cast<size_t>(k * M),
              labels.begin() + static_cast<size_t>((k + 1) * M), static_cast<int>(k));
  }
  return Dataset(std::move(samples), std::move(labels), Modality::Points);
}

namespace {

ClusterResult assign_with_classifier(const Dataset& X, const FeatureClassifier& clf) {
  ClusterResult r;
  r.soft = clf.probs(X.samples());
  r.hard.resize(static_cast<size_t>(X.size()));
  for (int64_t i = 0; i < r.soft.rows(); ++i) {
    int best = 0;
    for (int64_t j = 1; j < r.soft.cols(); ++j)
      if (r.soft.at(i, j) > r.soft.at(i, best)) best = static_cast<int>(j);
    r.hard[static_cast<size_t>(i)] = best;
  }
  if (X.labeled()) {
    const int64_t N = X.n_classes();
    const int64_t K = r.soft.cols();
    r.acc = acc(X.labels(), r.hard, N, K, &r.permutation);
    r.nmi = nmi(X.labels(), r.hard);
  }
  return r;
}

}  // namespace

ClusterResult assign_clusters(const Dataset& X, const GanModel& model, const MixturePrior& prior,
                              int64_t M, const ClassifierConfig& clf_cfg, uint64_t seed) {
  if (prior.components() == 1) {
    // Degenerate single-cluster partition; no classifier to train.
    ClusterResult r;
    r.soft = Tensor::full({X.size(), 1}, 1.0);
    r.hard.assign(static_cast<size_t>(X.size()), 0);
    if (X.labeled()) {
      r.acc = acc(X.labels(), r.hard, X.n_classes(), 1, &r.permutation);
      r.nmi = nmi(X.labels(), r.hard);
    }
    return r;
  }
  Rng rng(derive_seed(seed, "cluster-synth"));
  Dataset synth = generate_labeled_synthetic(model, prior, M, rng);
  ClassifierConfig cfg = clf_cfg;
  cfg.seed = derive_seed(seed, "cluster-classifier");
  FeatureClassifier clf = FeatureClassifier::train(synth, cfg);
  return assign_with_classifier(X, clf);
}

ClusterResult cluster(const Dataset& X, int64_t K, int64_t M, const TrainConfig& train_cfg,
                      const ClassifierConfig& clf_cfg, uint64_t seed) {
  if (K < 1) throw ParamError("cluster count must be >= 1");
  // The pipeline never sees X's labels: train on a stripped copy.
  Dataset unlabeled(X.samples(), std::nullopt, X.modality());
  if (X.modality() == Modality::Images)
    unlabeled.set_image_dims(X.height(), X.width(), X.channels());

  TrainConfig cfg = train_cfg;
  cfg.K = K;
  cfg.supervised = false;
  cfg.seed = derive_seed(seed, "cluster-gan");
  TrainSession session = TrainSession::create(cfg, unlabeled);
  session.run(unlabeled, cfg.iters);

  ClusterResult r = assign_clusters(X, session.model(), session.prior(), M, clf_cfg, seed);
  return r;
}

}  // namespace gmgan
