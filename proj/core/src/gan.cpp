#include "gmgan/gan.hpp"

namespace gmgan {

LabelMap LabelMap::make(int64_t K, int64_t N, std::optional<std::vector<int>> explicit_table) {
  if (K < 1 || N < 1) throw ParamError("label map needs K >= 1 and N >= 1");
  LabelMap f;
  if (explicit_table) {
    if (static_cast<int64_t>(explicit_table->size()) != K)
      throw ParamError("explicit label table must have K entries");
    for (int c : *explicit_table)
      if (c < 0 || c >= N) throw ParamError("label table entry out of class range");
    f.table = std::move(*explicit_table);
    return f;
  }
  f.table.resize(static_cast<size_t>(K));
  for (int64_t k = 0; k < K; ++k)
    f.table[static_cast<size_t>(k)] = static_cast<int>(K > N ? k % N : k);
  return f;
}

void GanModel::validate() const {
  gen_spec.validate();
  disc_spec.validate();
  if (disc_spec.in_width() != gen_spec.out_width())
    throw DimError("discriminator input width must match generator output width");
  const int64_t want = mode == GanMode::Supervised ? n_classes : 1;
  if (disc_spec.out_width() != want)
    throw DimError("discriminator output width must be " + std::to_string(want) +
                   " for this mode");
  if (f.components() != 0 && mode == GanMode::Supervised) {
    for (int c : f.table)
      if (c < 0 || c >= n_classes) throw ParamError("label map entry out of class range");
  }
}

GanModel make_gan(const MlpSpec& gen_spec, const MlpSpec& disc_spec, GanMode mode, int64_t N,
                  LabelMap f, Rng& rng, double weight_std, double out_scale) {
  GanModel m;
  m.gen_spec = gen_spec;
  m.disc_spec = disc_spec;
  m.mode = mode;
  m.n_classes = N;
  m.f = std::move(f);
  m.out_scale = out_scale;
  m.validate();
  init_mlp_params(m.gen_spec, m.gen_params, rng, weight_std);
  init_mlp_params(m.disc_spec, m.disc_params, rng, weight_std);
  return m;
}

Var generate_on(Tape& tape, GanModel& model, Var z_batch) {
  Var out = mlp_apply(tape, model.gen_spec, model.gen_params, z_batch);
  if (model.out_scale != 1.0) out = tape.scale(out, model.out_scale);
  return out;
}

Tensor generate(const GanModel& model, const Tensor& z_batch) {
  Tensor out = mlp_eval(model.gen_spec, model.gen_params, z_batch);
  if (model.out_scale != 1.0)
    for (double& x : out.v) x *= model.out_scale;
  return out;
}

Var discriminate_on(Tape& tape, GanModel& model, Var x_batch) {
  return mlp_apply(tape, model.disc_spec, model.disc_params, x_batch);
}

Tensor discriminate(const GanModel& model, const Tensor& x_batch) {
  return mlp_eval(model.disc_spec, model.disc_params, x_batch);
}

namespace {

Var clamped(Tape& t, Var p) { return t.clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

Var loss_g_unsup_on(Tape& t, Var d_on_fake) {
  return t.neg(t.mean_all(t.log(clamped(t, d_on_fake))));
}

Var loss_d_unsup_on(Tape& t, Var d_on_real, Var d_on_fake) {
  Var real_term = t.neg(t.mean_all(t.log(clamped(t, d_on_real))));
  Var fake_term = t.neg(t.mean_all(t.log(t.one_minus(clamped(t, d_on_fake)))));
  return t.add(real_term, fake_term);
}

Var loss_g_sup_on(Tape& t, Var d_on_fake, const std::vector<int>& component_ids,
                  const LabelMap& f) {
  std::vector<int> targets(component_ids.size());
  for (size_t i = 0; i < component_ids.size(); ++i) targets[i] = f(component_ids[i]);
  Var p = clamped(t, d_on_fake);
  Var log_p = t.log(p);
  Var log_not = t.log(t.one_minus(p));
  // Per sample: -log p[target] - (sum_m log(1-p[m]) - log(1-p[target]))
  Var target_pos = t.gather_col(log_p, targets);
  Var target_not = t.gather_col(log_not, targets);
  Var complement = t.sub(t.row_sum(log_not), target_not);
  Var per_sample = t.neg(t.add(target_pos, complement));
  return t.mean_all(per_sample);
}

Var loss_d_sup_on(Tape& t, Var d_on_real, const std::vector<int>& labels, Var d_on_fake) {
  Var pr = clamped(t, d_on_real);
  Var log_pr = t.log(pr);
  Var log_not_r = t.log(t.one_minus(pr));
  Var label_pos = t.gather_col(log_pr, labels);
  Var label_not = t.gather_col(log_not_r, labels);
  Var complement = t.sub(t.row_sum(log_not_r), label_not);
  Var real_per_sample = t.neg(t.add(label_pos, complement));

  Var pf = clamped(t, d_on_fake);
  Var fake_per_sample = t.neg(t.row_sum(t.log(t.one_minus(pf))));
  return t.add(t.mean_all(real_per_sample), t.mean_all(fake_per_sample));
}

double loss_g_unsup(const Tensor& d_on_fake) {
  Tape t;
  return t.value(loss_g_unsup_on(t, t.input(d_on_fake))).v[0];
}

double loss_d_unsup(const Tensor& d_on_real, const Tensor& d_on_fake) {
  Tape t;
  return t.value(loss_d_unsup_on(t, t.input(d_on_real), t.input(d_on_fake))).v[0];
}

double loss_g_sup(const Tensor& d_on_fake, const std::vector<int>& component_ids,
                  const LabelMap& f) {
  Tape t;
  return t.value(loss_g_sup_on(t, t.input(d_on_fake), component_ids, f)).v[0];
}

double loss_d_sup(const Tensor& d_on_real, const std::vector<int>& labels,
                  const Tensor& d_on_fake) {
  Tape t;
  return t.value(loss_d_sup_on(t, t.input(d_on_real), labels, t.input(d_on_fake))).v[0];
}

}  // namespace gmgan
