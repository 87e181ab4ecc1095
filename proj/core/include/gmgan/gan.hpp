#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmgan/mixture.hpp"
#include "gmgan/mlp.hpp"

namespace gmgan {

enum class GanMode { Unsupervised, Supervised };

// Discriminator probabilities are clamped to [kProbClamp, 1 - kProbClamp]
// before any log, so losses stay finite.
inline constexpr double kProbClamp = 1e-7;

// Mapping f from mixture component index [K] to class label [N].
struct LabelMap {
  std::vector<int> table;  // size K, entries in [0, N)

  int operator()(int k) const { return table[static_cast<size_t>(k)]; }
  int64_t components() const { return static_cast<int64_t>(table.size()); }

  // Defaults: identity when K == N, k mod N when K > N (surjective),
  // k -> k when K < N (injective). An explicit table overrides.
  static LabelMap make(int64_t K, int64_t N, std::optional<std::vector<int>> explicit_table = {});
};

// Generator + discriminator parameter stores plus supervision mode.
struct GanModel {
  MlpSpec gen_spec;
  ParamStore gen_params;
  MlpSpec disc_spec;
  ParamStore disc_params;
  GanMode mode = GanMode::Unsupervised;
  int64_t n_classes = 1;  // N; discriminator output width in supervised mode
  LabelMap f;
  double out_scale = 1.0;  // generator output multiplier (1.5 covers the toy box)

  int64_t latent_dim() const { return gen_spec.in_width(); }
  int64_t data_dim() const { return gen_spec.out_width(); }
  void validate() const;
};

// Fresh model with seeded Gaussian weight init. Discriminator output width is
// 1 (unsupervised) or N (supervised), sigmoid activated.
GanModel make_gan(const MlpSpec& gen_spec, const MlpSpec& disc_spec, GanMode mode, int64_t N,
                  LabelMap f, Rng& rng, double weight_std = 0.02, double out_scale = 1.0);

// Forward passes. The *_on variants build onto a caller tape for training
// graphs; the value forms are trace-free.
Var generate_on(Tape& tape, GanModel& model, Var z_batch);
Tensor generate(const GanModel& model, const Tensor& z_batch);
Var discriminate_on(Tape& tape, GanModel& model, Var x_batch);
Tensor discriminate(const GanModel& model, const Tensor& x_batch);

// Losses, tape form (scalar nodes) and value form. Value forms run the same
// graph construction on a private tape.
//
// Unsupervised:  L(G) = -mean log D(G(z))
//                L(D) = -mean log D(x) - mean log(1 - D(G(z)))
// The trainer applies the extra 1/2 on L(D) when aggregating a step.
Var loss_g_unsup_on(Tape& tape, Var d_on_fake);
Var loss_d_unsup_on(Tape& tape, Var d_on_real, Var d_on_fake);
double loss_g_unsup(const Tensor& d_on_fake);
double loss_d_unsup(const Tensor& d_on_real, const Tensor& d_on_fake);

// Supervised (N-way discriminator output). Component ids map through f to
// target classes for the generator; real samples use their dataset labels.
Var loss_g_sup_on(Tape& tape, Var d_on_fake, const std::vector<int>& component_ids,
                  const LabelMap& f);
Var loss_d_sup_on(Tape& tape, Var d_on_real, const std::vector<int>& labels, Var d_on_fake);
double loss_g_sup(const Tensor& d_on_fake, const std::vector<int>& component_ids,
                  const LabelMap& f);
double loss_d_sup(const Tensor& d_on_real, const std::vector<int>& labels,
                  const Tensor& d_on_fake);

}  // namespace gmgan
