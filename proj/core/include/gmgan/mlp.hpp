#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gmgan/rng.hpp"
#include "gmgan/tape.hpp"
#include "gmgan/tensor.hpp"

namespace gmgan {

// Ordered name -> Tensor map. Iteration order is insertion order and is the
// order every serializer and optimizer walks, so runs are reproducible.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  void zero_grads();   // drop all gradient buffers
  bool grads_present() const;

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

// Fully-connected network: widths[0] inputs, widths.back() outputs, one
// activation per layer.
struct MlpSpec {
  std::vector<int64_t> widths;
  std::vector<Act> acts;
  double leaky_slope = 0.2;

  int64_t layers() const { return static_cast<int64_t>(widths.size()) - 1; }
  int64_t in_width() const { return widths.front(); }
  int64_t out_width() const { return widths.back(); }
  void validate() const;

  // Hidden layers leaky-relu, output layer `out`.
  static MlpSpec make(std::vector<int64_t> widths, Act out, double leaky_slope = 0.2);
};

// Gaussian N(0, weight_std^2) weights, zero biases; names w0,b0,w1,b1,...
void init_mlp_params(const MlpSpec& spec, ParamStore& params, Rng& rng, double weight_std = 0.02);

// Builds the layer stack on an existing tape (for graphs that span several
// networks). Returns the output node.
Var mlp_apply(Tape& tape, const MlpSpec& spec, ParamStore& params, Var input);

// Forward pass with a retained trace for backprop.
struct ForwardTrace {
  Tape tape;
  Var out;
  const Tensor& output() const { return tape.value(out); }
};

ForwardTrace mlp_forward(const MlpSpec& spec, ParamStore& params, const Tensor& batch);

// Trace-free forward pass for evaluation and sampling.
Tensor mlp_eval(const MlpSpec& spec, const ParamStore& params, const Tensor& batch);

// Per-layer outputs (post-activation), index 0 = first layer. Used by the
// scorer's feature extraction.
std::vector<Tensor> mlp_eval_layers(const MlpSpec& spec, const ParamStore& params,
                                    const Tensor& batch);

// Seeds the trace output with d(loss)/d(output) and accumulates parameter
// gradients. Consumes the trace.
void backprop(ForwardTrace& trace, const Tensor& loss_grad);

// Max over parameter entries of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
// with `numeric` from central differences. `loss` evaluates the scalar loss at the
// current parameters; `compute_grads` populates fresh gradients for them.
double finite_diff_check(ParamStore& params, const std::function<double()>& loss,
                         const std::function<void()>& compute_grads, double h);

// Spec-level convenience: checks d(loss(mlp(batch)))/d(params) for a loss
// given by value and output-cotangent callbacks.
struct LossFn {
  std::function<double(const Tensor&)> value;
  std::function<Tensor(const Tensor&)> output_grad;
};

double finite_diff_check(const MlpSpec& spec, ParamStore& params, const Tensor& batch,
                         const LossFn& loss_fn, double h);

}  // namespace gmgan
