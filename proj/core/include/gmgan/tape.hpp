#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gmgan/tensor.hpp"

namespace gmgan {

enum class Act { Identity, LeakyRelu, Tanh, Sigmoid };

// Handle into a Tape node.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff over a linear record of operations. Creation order
// is topological, so one reverse sweep propagates gradients. A tape is
// single-use: backward() consumes it.
class Tape {
 public:
  Tape() = default;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. input() copies the value and receives no gradient; param()
  // registers `p` as a gradient sink: backward() accumulates into p.grad.
  Var input(Tensor value);
  Var param(Tensor& p);

  // out[n x m] = a[n x k] * b[k x m]
  Var matmul(Var a, Var b);
  // out[n x m] = a[n x m] + bias[m] broadcast over rows
  Var add_bias(Var a, Var bias);
  Var activation(Var a, Act f, double leaky_slope = 0.2);
  Var scale(Var a, double s);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var neg(Var a);
  Var one_minus(Var a);
  Var clamp(Var a, double lo, double hi);
  Var log(Var a);
  Var sum_all(Var a);
  Var mean_all(Var a);
  // [B x N] -> [B x 1]
  Var row_sum(Var a);
  // out[i, 0] = a[i, col[i]]
  Var gather_col(Var a, std::vector<int> col_per_row);
  // Row-wise log softmax, numerically stabilized.
  Var log_softmax(Var a);
  // Reparameterized mixture sampling, batched:
  //   out[i,:] = sqrt_scale * (factor[comp[i]] applied to eps[i,:]) + mu[comp[i],:]
  // `factor` is [K x d] (per-component diagonal) or [K x d x d] (full).
  Var mixture_affine(Var eps, std::vector<int> comp, Var mu, Var factor, double sqrt_scale);

  const Tensor& value(Var v) const;
  int64_t size() const { return static_cast<int64_t>(nodes_.size()); }
  bool consumed() const { return consumed_; }

  // Reverse sweep from a scalar node, seeding d(out)/d(out) = 1.
  void backward(Var scalar_out);
  // Reverse sweep seeding the output node with an explicit cotangent.
  void backward_seeded(Var out, const Tensor& seed);

 private:
  struct Node {
    Tensor val;
    std::vector<double> grad;
    std::function<void(Tape&, const Node&)> back;  // adds into parents' grads
    Tensor* sink = nullptr;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  std::vector<double>& grad_of(Var v) { return node(v).grad; }
  Var push(Tensor val, std::function<void(Tape&, const Node&)> back, Tensor* sink = nullptr);
  void run_backward(Var out);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

double activation_apply(Act f, double x, double leaky_slope);

}  // namespace gmgan
