#include "gmgan/mlp.hpp"

#include <cmath>

#include "kernels.hpp"

namespace gmgan {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (has(name)) throw UsageError("parameter '" + name + "' already exists");
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

Tensor& ParamStore::get(const std::string& name) {
  for (auto& [n, t] : items_)
    if (n == name) return t;
  throw UsageError("unknown parameter '" + name + "'");
}

const Tensor& ParamStore::get(const std::string& name) const {
  for (const auto& [n, t] : items_)
    if (n == name) return t;
  throw UsageError("unknown parameter '" + name + "'");
}

bool ParamStore::has(const std::string& name) const {
  for (const auto& [n, t] : items_)
    if (n == name) return true;
  return false;
}

void ParamStore::zero_grads() {
  for (auto& [n, t] : items_) t.clear_grad();
}

bool ParamStore::grads_present() const {
  for (const auto& [n, t] : items_)
    if (!t.grad) return false;
  return true;
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ParamError("MlpSpec needs at least input and output widths");
  for (int64_t w : widths)
    if (w < 1) throw ParamError("MlpSpec widths must be positive");
  if (acts.size() != widths.size() - 1)
    throw ParamError("MlpSpec needs one activation per layer");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw ParamError("leaky slope must lie in (0,1)");
}

MlpSpec MlpSpec::make(std::vector<int64_t> widths, Act out, double leaky_slope) {
  MlpSpec s;
  s.widths = std::move(widths);
  s.acts.assign(s.widths.size() - 1, Act::LeakyRelu);
  s.acts.back() = out;
  s.leaky_slope = leaky_slope;
  s.validate();
  return s;
}

static std::string wname(int64_t l) { return "w" + std::to_string(l); }
static std::string bname(int64_t l) { return "b" + std::to_string(l); }

void init_mlp_params(const MlpSpec& spec, ParamStore& params, Rng& rng, double weight_std) {
  spec.validate();
  for (int64_t l = 0; l < spec.layers(); ++l) {
    Tensor w = Tensor::zeros({spec.widths[l], spec.widths[l + 1]});
    for (double& x : w.v) x = weight_std * rng.normal();
    params.add(wname(l), std::move(w));
    params.add(bname(l), Tensor::zeros({spec.widths[l + 1]}));
  }
}

Var mlp_apply(Tape& tape, const MlpSpec& spec, ParamStore& params, Var input) {
  spec.validate();
  const Tensor& in = tape.value(input);
  if (in.cols() != spec.in_width())
    throw DimError("mlp input width " + std::to_string(in.cols()) + " does not match spec " +
                   std::to_string(spec.in_width()));
  Var h = input;
  for (int64_t l = 0; l < spec.layers(); ++l) {
    Tensor& w = params.get(wname(l));
    Tensor& b = params.get(bname(l));
    if (w.shape != std::vector<int64_t>{spec.widths[l], spec.widths[l + 1]})
      throw DimError("parameter " + wname(l) + " has shape " + shape_string(w.shape));
    h = tape.add_bias(tape.matmul(h, tape.param(w)), tape.param(b));
    // Check before the activation: tanh/sigmoid would mask an overflow.
    ensure_finite(tape.value(h), "layer " + std::to_string(l) + " pre-activations");
    h = tape.activation(h, spec.acts[static_cast<size_t>(l)], spec.leaky_slope);
  }
  return h;
}

ForwardTrace mlp_forward(const MlpSpec& spec, ParamStore& params, const Tensor& batch) {
  ForwardTrace tr;
  Var in = tr.tape.input(batch);
  tr.out = mlp_apply(tr.tape, spec, params, in);
  return tr;
}

Tensor mlp_eval(const MlpSpec& spec, const ParamStore& params, const Tensor& batch) {
  spec.validate();
  if (batch.cols() != spec.in_width())
    throw DimError("mlp input width " + std::to_string(batch.cols()) + " does not match spec " +
                   std::to_string(spec.in_width()));
  const int64_t B = batch.rows();
  Tensor h = batch;
  for (int64_t l = 0; l < spec.layers(); ++l) {
    const Tensor& w = params.get(wname(l));
    const Tensor& b = params.get(bname(l));
    const int64_t m = spec.widths[l + 1];
    Tensor next = Tensor::zeros({B, m});
    detail::mm_nn(next.v.data(), h.v.data(), w.v.data(), B, spec.widths[l], m, false);
    for (int64_t i = 0; i < B; ++i)
      for (int64_t j = 0; j < m; ++j) next.v[static_cast<size_t>(i * m + j)] += b.v[static_cast<size_t>(j)];
    ensure_finite(next, "layer " + std::to_string(l) + " pre-activations");
    for (double& x : next.v)
      x = activation_apply(spec.acts[static_cast<size_t>(l)], x, spec.leaky_slope);
    h = std::move(next);
  }
  return h;
}

std::vector<Tensor> mlp_eval_layers(const MlpSpec& spec, const ParamStore& params,
                                    const Tensor& batch) {
  spec.validate();
  std::vector<Tensor> outs;
  Tensor h = batch;
  for (int64_t l = 0; l < spec.layers(); ++l) {
    const Tensor& w = params.get(wname(l));
    const Tensor& b = params.get(bname(l));
    const int64_t B = h.rows(), m = spec.widths[l + 1];
    Tensor next = Tensor::zeros({B, m});
    detail::mm_nn(next.v.data(), h.v.data(), w.v.data(), B, spec.widths[l], m, false);
    for (int64_t i = 0; i < B; ++i)
      for (int64_t j = 0; j < m; ++j) next.v[static_cast<size_t>(i * m + j)] += b.v[static_cast<size_t>(j)];
    ensure_finite(next, "layer " + std::to_string(l) + " pre-activations");
    for (double& x : next.v)
      x = activation_apply(spec.acts[static_cast<size_t>(l)], x, spec.leaky_slope);
    h = next;
    outs.push_back(std::move(next));
  }
  return outs;
}

void backprop(ForwardTrace& trace, const Tensor& loss_grad) {
  trace.tape.backward_seeded(trace.out, loss_grad);
}

double finite_diff_check(ParamStore& params, const std::function<double()>& loss,
                         const std::function<void()>& compute_grads, double h) {
  if (h <= 0.0) throw ParamError("finite_diff_check requires h > 0");
  params.zero_grads();
  compute_grads();
  // Freeze the analytic gradients before perturbing.
  std::vector<std::vector<double>> analytic;
  for (auto& [name, t] : params) {
    if (!t.grad) throw UsageError("gradient missing for parameter '" + name + "'");
    analytic.push_back(*t.grad);
  }
  double worst = 0.0;
  size_t pi = 0;
  for (auto& [name, t] : params) {
    for (size_t i = 0; i < t.v.size(); ++i) {
      const double keep = t.v[i];
      t.v[i] = keep + h;
      const double up = loss();
      t.v[i] = keep - h;
      const double down = loss();
      t.v[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic[pi][i];
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
    ++pi;
  }
  params.zero_grads();
  return worst;
}

double finite_diff_check(const MlpSpec& spec, ParamStore& params, const Tensor& batch,
                         const LossFn& loss_fn, double h) {
  auto loss = [&]() {
    Tensor out = mlp_eval(spec, params, batch);
    return loss_fn.value(out);
  };
  auto grads = [&]() {
    ForwardTrace tr = mlp_forward(spec, params, batch);
    Tensor g = loss_fn.output_grad(tr.output());
    backprop(tr, g);
  };
  return finite_diff_check(params, loss, grads, h);
}

}  // namespace gmgan
