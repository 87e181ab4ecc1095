#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmgan/classifier.hpp"
#include "gmgan/dataset.hpp"
#include "gmgan/trainer.hpp"

namespace gmgan {

// Joint counts of (true label, cluster id).
struct ContingencyTable {
  int64_t n_true = 0;
  int64_t n_cluster = 0;
  std::vector<int64_t> counts;  // [n_true x n_cluster], row-major

  int64_t at(int64_t t, int64_t c) const {
    return counts[static_cast<size_t>(t * n_cluster + c)];
  }
  int64_t total() const;

  static ContingencyTable build(const std::vector<int>& true_labels,
                                const std::vector<int>& cluster_ids, int64_t n_true,
                                int64_t n_cluster);
};

// Clustering accuracy: best-permutation match fraction. The table is padded
// square when the class and cluster counts differ, and the assignment is
// one-to-one on the padded square.
double acc_brute_force(const ContingencyTable& t);   // permutation scan, side <= 8
double acc_assignment(const ContingencyTable& t);    // Hungarian, any size
// Dispatches per the side count; also returns the optimal cluster -> class
// permutation when requested.
double acc(const std::vector<int>& true_labels, const std::vector<int>& cluster_ids, int64_t N,
           int64_t K, std::vector<int>* permutation = nullptr);

// Corpus-level normalized mutual information I(Y;C)/sqrt(H(Y)H(C)). When a
// marginal entropy is zero: 1 if the partitions are identical, else 0.
double nmi(const std::vector<int>& true_labels, const std::vector<int>& cluster_ids);

struct ClusterResult {
  Tensor soft;                 // [n x K] classifier probabilities
  std::vector<int> hard;       // argmax, lowest index on ties
  std::optional<double> acc;   // present when ground truth was available
  std::optional<double> nmi;
  std::vector<int> permutation;  // cluster -> class map used by ACC
};

// Alg. 2 synthesis stage: exactly M samples from each mixture component,
// labeled by component index.
Dataset generate_labeled_synthetic(const GanModel& model, const MixturePrior& prior, int64_t M,
                                   Rng& rng);

// Full Alg. 2 pipeline: train an unsupervised GM-GAN on X (its labels, if
// any, are withheld from training and used only for the metrics), generate
// the synthetic labeled set, train a K-way classifier on it, and assign
// clusters by argmax.
ClusterResult cluster(const Dataset& X, int64_t K, int64_t M, const TrainConfig& train_cfg,
                      const ClassifierConfig& clf_cfg, uint64_t seed);

// Assignment stage only, for a pre-trained model.
ClusterResult assign_clusters(const Dataset& X, const GanModel& model, const MixturePrior& prior,
                              int64_t M, const ClassifierConfig& clf_cfg, uint64_t seed);

}  // namespace gmgan
