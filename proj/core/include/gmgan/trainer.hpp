#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmgan/adam.hpp"
#include "gmgan/dataset.hpp"
#include "gmgan/gan.hpp"
#include "gmgan/mixture.hpp"

namespace gmgan {

struct TrainConfig {
  // Mixture prior.
  int64_t K = 9;
  int64_t d = 100;
  double c = 0.1;
  double sigma_init = 0.15;
  bool dynamic_prior = false;
  bool full_factor = false;

  // Loop shape.
  int64_t iters = 0;
  int64_t b_d = 64;
  int64_t b_g = 128;
  AdamConfig adam;  // adam.lr is the learning rate

  // Supervision.
  bool supervised = false;
  std::optional<std::vector<int>> label_table;

  // Architectures (hidden widths; in/out widths come from d and the data).
  std::vector<int64_t> g_hidden{128, 128};
  std::vector<int64_t> d_hidden{128, 128};
  double weight_std = 0.02;
  double leaky_slope = 0.2;
  double out_scale = 1.0;

  uint64_t seed = 1;
  int64_t epoch_size = 0;      // iterations per epoch; 0 = ceil(n / b_d)
  int64_t snapshot_every = 0;  // epochs between snapshots; 0 = off

  void validate() const;
};

struct TrainHistory {
  std::vector<double> loss_d;        // per iteration, after the Alg. 1 1/2 factor
  std::vector<double> loss_g;        // per iteration
  std::vector<double> epoch_metric;  // hook values, one per epoch boundary
  std::vector<double> epoch_seconds;
};

// Called at epoch boundaries (including epoch 0, before training) on a
// read-only model; returns a scalar metric (e.g. toy NLL).
using EpochHook =
    std::function<double(const GanModel&, const MixturePrior&, int64_t epoch)>;

// Owns everything one training run mutates: model, prior, optimizer moments
// and the sample stream. Checkpoints capture the full state, so resuming and
// continuing reproduces an uninterrupted run bit for bit.
class TrainSession {
 public:
  TrainSession(const TrainConfig& cfg, GanModel model, MixturePrior prior);

  // Builds model + prior from the config for the given dataset geometry.
  static TrainSession create(const TrainConfig& cfg, const Dataset& data);
  static TrainSession resume(const std::filesystem::path& checkpoint);

  // Runs `iters` iterations of the training loop (Alg. 1 body). The hook, if
  // given, fires at epoch boundaries including epoch 0 of this call.
  void run(const Dataset& data, int64_t iters, const EpochHook& hook = {});

  void save(const std::filesystem::path& path) const;

  const GanModel& model() const { return model_; }
  GanModel& model() { return model_; }
  const MixturePrior& prior() const { return prior_; }
  MixturePrior& prior() { return prior_; }
  const TrainHistory& history() const { return history_; }
  const TrainConfig& config() const { return cfg_; }
  int64_t iterations_done() const { return iter_; }
  Rng& rng() { return rng_; }

  int64_t epoch_size(const Dataset& data) const;

 private:
  void one_iteration(const Dataset& data);
  void iteration_body(const Dataset& data);

  TrainConfig cfg_;
  GanModel model_;
  MixturePrior prior_;
  AdamState adam_d_, adam_g_, adam_p_;
  Rng rng_;
  int64_t iter_ = 0;
  TrainHistory history_;
};

// Spec-shaped one-call training: builds a session around the given model and
// prior, runs cfg.iters iterations, returns the history.
TrainHistory train(const TrainConfig& cfg, const Dataset& data, GanModel& model,
                   MixturePrior& prior, Rng& rng, const EpochHook& hook = {});

// Standalone model+prior checkpoint (no optimizer state). Used for the
// trained artifacts the scorer and clustering consume.
void save_model_checkpoint(const std::filesystem::path& path, const GanModel& model,
                           const MixturePrior& prior);
std::pair<GanModel, MixturePrior> load_model_checkpoint(const std::filesystem::path& path);

// History CSV with header iter,loss_d,loss_g (plus the provenance comment).
void write_history_csv(const std::filesystem::path& path, const TrainHistory& h, uint64_t seed,
                       const std::string& config_hash);

}  // namespace gmgan
