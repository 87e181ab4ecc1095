#include "gmgan/tape.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace gmgan {

using detail::mm_nn;
using detail::mm_nt;
using detail::mm_tn;

double activation_apply(Act f, double x, double leaky_slope) {
  switch (f) {
    case Act::Identity:
      return x;
    case Act::LeakyRelu:
      return x >= 0.0 ? x : leaky_slope * x;
    case Act::Tanh:
      return std::tanh(x);
    case Act::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size()))
    throw UsageError("invalid tape handle");
  return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size()))
    throw UsageError("invalid tape handle");
  return nodes_[static_cast<size_t>(v.id)];
}

Var Tape::push(Tensor val, std::function<void(Tape&, const Node&)> back, Tensor* sink) {
  Node n;
  n.val = std::move(val);
  n.back = std::move(back);
  n.sink = sink;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::input(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::param(Tensor& p) {
  Tensor copy = p;
  copy.grad.reset();
  return push(std::move(copy), nullptr, &p);
}

const Tensor& Tape::value(Var v) const { return node(v).val; }

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = node(a).val;
  const Tensor& B = node(b).val;
  if (A.cols() != B.rows())
    throw DimError("matmul: " + shape_string(A.shape) + " x " + shape_string(B.shape));
  const int64_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor out = Tensor::zeros({n, m});
  mm_nn(out.v.data(), A.v.data(), B.v.data(), n, k, m, /*accumulate=*/false);
  return push(std::move(out), [a, b, n, k, m](Tape& t, const Node& self) {
    const Tensor& Av = t.node(a).val;
    const Tensor& Bv = t.node(b).val;
    // dA += dC * B^T ; dB += A^T * dC
    mm_nt(t.grad_of(a).data(), self.grad.data(), Bv.v.data(), n, m, k, /*accumulate=*/true);
    mm_tn(t.grad_of(b).data(), Av.v.data(), self.grad.data(), k, n, m, /*accumulate=*/true);
  });
}

Var Tape::add_bias(Var a, Var bias) {
  const Tensor& A = node(a).val;
  const Tensor& B = node(bias).val;
  const int64_t n = A.rows(), m = A.cols();
  if (B.size() != m)
    throw DimError("add_bias: bias " + shape_string(B.shape) + " vs cols " + std::to_string(m));
  Tensor out = A;
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) out.v[static_cast<size_t>(i * m + j)] += B.v[static_cast<size_t>(j)];
  return push(std::move(out), [a, bias, n, m](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    auto& db = t.grad_of(bias);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < m; ++j) {
        const double g = self.grad[static_cast<size_t>(i * m + j)];
        da[static_cast<size_t>(i * m + j)] += g;
        db[static_cast<size_t>(j)] += g;
      }
  });
}

Var Tape::activation(Var a, Act f, double leaky_slope) {
  const Tensor& A = node(a).val;
  Tensor out = A;
  for (double& x : out.v) x = activation_apply(f, x, leaky_slope);
  return push(std::move(out), [a, f, leaky_slope](Tape& t, const Node& self) {
    const Tensor& in = t.node(a).val;
    auto& da = t.grad_of(a);
    for (size_t i = 0; i < da.size(); ++i) {
      double d = 1.0;
      switch (f) {
        case Act::Identity:
          d = 1.0;
          break;
        case Act::LeakyRelu:
          d = in.v[i] >= 0.0 ? 1.0 : leaky_slope;
          break;
        case Act::Tanh:
          d = 1.0 - self.val.v[i] * self.val.v[i];
          break;
        case Act::Sigmoid:
          d = self.val.v[i] * (1.0 - self.val.v[i]);
          break;
      }
      da[i] += d * self.grad[i];
    }
  });
}

Var Tape::scale(Var a, double s) {
  Tensor out = node(a).val;
  for (double& x : out.v) x *= s;
  return push(std::move(out), [a, s](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    for (size_t i = 0; i < da.size(); ++i) da[i] += s * self.grad[i];
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = node(a).val;
  const Tensor& B = node(b).val;
  if (!A.same_shape(B))
    throw DimError("add: " + shape_string(A.shape) + " vs " + shape_string(B.shape));
  Tensor out = A;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += B.v[i];
  return push(std::move(out), [a, b](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    auto& db = t.grad_of(b);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      da[i] += self.grad[i];
      db[i] += self.grad[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& A = node(a).val;
  const Tensor& B = node(b).val;
  if (!A.same_shape(B))
    throw DimError("sub: " + shape_string(A.shape) + " vs " + shape_string(B.shape));
  Tensor out = A;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= B.v[i];
  return push(std::move(out), [a, b](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    auto& db = t.grad_of(b);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      da[i] += self.grad[i];
      db[i] -= self.grad[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = node(a).val;
  const Tensor& B = node(b).val;
  if (!A.same_shape(B))
    throw DimError("mul: " + shape_string(A.shape) + " vs " + shape_string(B.shape));
  Tensor out = A;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= B.v[i];
  return push(std::move(out), [a, b](Tape& t, const Node& self) {
    const Tensor& Av = t.node(a).val;
    const Tensor& Bv = t.node(b).val;
    auto& da = t.grad_of(a);
    auto& db = t.grad_of(b);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      da[i] += Bv.v[i] * self.grad[i];
      db[i] += Av.v[i] * self.grad[i];
    }
  });
}

Var Tape::neg(Var a) { return scale(a, -1.0); }

Var Tape::one_minus(Var a) {
  Tensor out = node(a).val;
  for (double& x : out.v) x = 1.0 - x;
  return push(std::move(out), [a](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    for (size_t i = 0; i < self.grad.size(); ++i) da[i] -= self.grad[i];
  });
}

Var Tape::clamp(Var a, double lo, double hi) {
  Tensor out = node(a).val;
  for (double& x : out.v) x = std::min(hi, std::max(lo, x));
  return push(std::move(out), [a, lo, hi](Tape& t, const Node& self) {
    const Tensor& in = t.node(a).val;
    auto& da = t.grad_of(a);
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (in.v[i] >= lo && in.v[i] <= hi) da[i] += self.grad[i];
  });
}

Var Tape::log(Var a) {
  Tensor out = node(a).val;
  for (double& x : out.v) x = std::log(x);
  return push(std::move(out), [a](Tape& t, const Node& self) {
    const Tensor& in = t.node(a).val;
    auto& da = t.grad_of(a);
    for (size_t i = 0; i < self.grad.size(); ++i) da[i] += self.grad[i] / in.v[i];
  });
}

Var Tape::sum_all(Var a) {
  const Tensor& A = node(a).val;
  double s = 0.0;
  for (double x : A.v) s += x;
  return push(Tensor::scalar(s), [a](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    const double g = self.grad[0];
    for (double& x : da) x += g;
  });
}

Var Tape::mean_all(Var a) {
  const Tensor& A = node(a).val;
  if (A.size() == 0) throw ParamError("mean over empty tensor");
  const double inv = 1.0 / static_cast<double>(A.size());
  double s = 0.0;
  for (double x : A.v) s += x;
  return push(Tensor::scalar(s * inv), [a, inv](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    const double g = self.grad[0] * inv;
    for (double& x : da) x += g;
  });
}

Var Tape::row_sum(Var a) {
  const Tensor& A = node(a).val;
  const int64_t n = A.rows(), m = A.cols();
  Tensor out = Tensor::zeros({n, 1});
  for (int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < m; ++j) s += A.v[static_cast<size_t>(i * m + j)];
    out.v[static_cast<size_t>(i)] = s;
  }
  return push(std::move(out), [a, n, m](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    for (int64_t i = 0; i < n; ++i) {
      const double g = self.grad[static_cast<size_t>(i)];
      for (int64_t j = 0; j < m; ++j) da[static_cast<size_t>(i * m + j)] += g;
    }
  });
}

Var Tape::gather_col(Var a, std::vector<int> col_per_row) {
  const Tensor& A = node(a).val;
  const int64_t n = A.rows(), m = A.cols();
  if (static_cast<int64_t>(col_per_row.size()) != n)
    throw DimError("gather_col: need one column index per row");
  Tensor out = Tensor::zeros({n, 1});
  for (int64_t i = 0; i < n; ++i) {
    const int c = col_per_row[static_cast<size_t>(i)];
    if (c < 0 || c >= m) throw ParamError("gather_col: column index out of range");
    out.v[static_cast<size_t>(i)] = A.v[static_cast<size_t>(i * m + c)];
  }
  return push(std::move(out), [a, m, cols = std::move(col_per_row)](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    for (size_t i = 0; i < cols.size(); ++i)
      da[i * static_cast<size_t>(m) + static_cast<size_t>(cols[i])] += self.grad[i];
  });
}

Var Tape::log_softmax(Var a) {
  const Tensor& A = node(a).val;
  const int64_t n = A.rows(), m = A.cols();
  Tensor out = A;
  for (int64_t i = 0; i < n; ++i) {
    double* row = out.v.data() + i * m;
    double mx = row[0];
    for (int64_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double lse = 0.0;
    for (int64_t j = 0; j < m; ++j) lse += std::exp(row[j] - mx);
    lse = mx + std::log(lse);
    for (int64_t j = 0; j < m; ++j) row[j] -= lse;
  }
  return push(std::move(out), [a, n, m](Tape& t, const Node& self) {
    auto& da = t.grad_of(a);
    for (int64_t i = 0; i < n; ++i) {
      double gsum = 0.0;
      for (int64_t j = 0; j < m; ++j) gsum += self.grad[static_cast<size_t>(i * m + j)];
      for (int64_t j = 0; j < m; ++j) {
        const size_t idx = static_cast<size_t>(i * m + j);
        da[idx] += self.grad[idx] - std::exp(self.val.v[idx]) * gsum;
      }
    }
  });
}

Var Tape::mixture_affine(Var eps, std::vector<int> comp, Var mu, Var factor, double sqrt_scale) {
  const Tensor& E = node(eps).val;
  const Tensor& M = node(mu).val;
  const Tensor& F = node(factor).val;
  const int64_t B = E.rows(), d = E.cols();
  if (M.rank() != 2 || M.cols() != d) throw DimError("mixture_affine: mu must be [K x d]");
  const int64_t K = M.shape[0];
  const bool full = F.rank() == 3;
  if (full) {
    if (F.shape != std::vector<int64_t>{K, d, d})
      throw DimError("mixture_affine: full factor must be [K x d x d]");
  } else if (F.shape != std::vector<int64_t>{K, d}) {
    throw DimError("mixture_affine: diagonal factor must be [K x d]");
  }
  if (static_cast<int64_t>(comp.size()) != B)
    throw DimError("mixture_affine: need one component id per row");
  for (int c : comp)
    if (c < 0 || c >= K) throw ParamError("mixture_affine: component index out of range");

  Tensor out = Tensor::zeros({B, d});
  for (int64_t i = 0; i < B; ++i) {
    const int k = comp[static_cast<size_t>(i)];
    const double* e = E.v.data() + i * d;
    double* o = out.v.data() + i * d;
    const double* mk = M.v.data() + k * d;
    if (full) {
      const double* A = F.v.data() + static_cast<int64_t>(k) * d * d;
      for (int64_t r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int64_t c = 0; c < d; ++c) acc += A[r * d + c] * e[c];
        o[r] = sqrt_scale * acc + mk[r];
      }
    } else {
      const double* f = F.v.data() + k * d;
      for (int64_t j = 0; j < d; ++j) o[j] = sqrt_scale * f[j] * e[j] + mk[j];
    }
  }
  return push(std::move(out),
              [eps, mu, factor, sqrt_scale, d, full, comp = std::move(comp)](Tape& t, const Node& self) {
                const Tensor& E = t.node(eps).val;
                const Tensor& F = t.node(factor).val;
                auto& de = t.grad_of(eps);
                auto& dm = t.grad_of(mu);
                auto& df = t.grad_of(factor);
                const int64_t B = E.rows();
                for (int64_t i = 0; i < B; ++i) {
                  const int k = comp[static_cast<size_t>(i)];
                  const double* g = self.grad.data() + i * d;
                  const double* e = E.v.data() + i * d;
                  double* dmk = dm.data() + k * d;
                  if (full) {
                    const double* A = F.v.data() + static_cast<int64_t>(k) * d * d;
                    double* dA = df.data() + static_cast<int64_t>(k) * d * d;
                    for (int64_t r = 0; r < d; ++r) {
                      dmk[r] += g[r];
                      for (int64_t c = 0; c < d; ++c) {
                        dA[r * d + c] += sqrt_scale * g[r] * e[c];
                        de[i * d + c] += sqrt_scale * A[r * d + c] * g[r];
                      }
                    }
                  } else {
                    const double* f = F.v.data() + k * d;
                    double* dfk = df.data() + k * d;
                    for (int64_t j = 0; j < d; ++j) {
                      dmk[j] += g[j];
                      dfk[j] += sqrt_scale * g[j] * e[j];
                      de[i * d + j] += sqrt_scale * f[j] * g[j];
                    }
                  }
                }
              });
}

void Tape::backward(Var scalar_out) {
  if (node(scalar_out).val.size() != 1)
    throw UsageError("backward requires a scalar output node");
  backward_seeded(scalar_out, Tensor::scalar(1.0));
}

void Tape::backward_seeded(Var out, const Tensor& seed) {
  if (consumed_) throw UsageError("trace already consumed by a previous backward pass");
  Node& o = node(out);
  if (seed.size() != o.val.size())
    throw DimError("backward seed shape " + shape_string(seed.shape) + " does not match output " +
                   shape_string(o.val.shape));
  consumed_ = true;
  for (Node& n : nodes_) n.grad.assign(n.val.v.size(), 0.0);
  o.grad = seed.v;
  run_backward(out);
}

void Tape::run_backward(Var out) {
  for (int64_t i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.back) n.back(*this, n);
  }
  for (Node& n : nodes_) {
    if (!n.sink) continue;
    n.sink->ensure_grad();
    auto& g = *n.sink->grad;
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  }
}

}  // namespace gmgan
