#include <doctest.h>

#include <cmath>

#include "gmgan/adam.hpp"

using namespace gmgan;

namespace {

ParamStore scalar_store(double value) {
  ParamStore p;
  p.add("x", Tensor({1}, {value}));
  return p;
}

void set_grad(ParamStore& p, const std::string& name, std::vector<double> g) {
  Tensor& t = p.get(name);
  t.ensure_grad();
  *t.grad = std::move(g);
}

}  // namespace

TEST_CASE("adam: zero gradients leave parameters unchanged, t advances") {
  ParamStore p = scalar_store(3.25);
  AdamState st(p, {});
  set_grad(p, "x", {0.0});
  adam_step(p, st);
  CHECK(p.get("x").v[0] == 3.25);
  CHECK(st.t() == 1);
  CHECK(!p.get("x").grad);  // cleared
}

TEST_CASE("adam: first step moves by about -lr * sign(g)") {
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.eps = 1e-8;
  ParamStore p = scalar_store(1.0);
  AdamState st(p, cfg);
  set_grad(p, "x", {0.5});
  adam_step(p, st);
  // mhat = g, vhat = g^2 on step one, so the update is -lr * g/(|g| + eps).
  CHECK(p.get("x").v[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));

  ParamStore q = scalar_store(1.0);
  AdamState st2(q, cfg);
  set_grad(q, "x", {-7.0});
  adam_step(q, st2);
  CHECK(q.get("x").v[0] == doctest::Approx(1.0 + 0.01).epsilon(1e-6));
}

TEST_CASE("adam: two steps with constant gradient match the hand recurrence") {
  AdamConfig cfg;
  cfg.lr = 0.003;
  cfg.beta1 = 0.5;
  cfg.beta2 = 0.999;
  cfg.eps = 1e-8;
  const double g = 0.37;

  // Independent scalar recurrence.
  double x = 2.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mhat = m / (1 - std::pow(cfg.beta1, t));
    const double vhat = v / (1 - std::pow(cfg.beta2, t));
    x -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }

  ParamStore p = scalar_store(2.0);
  AdamState st(p, cfg);
  for (int t = 0; t < 2; ++t) {
    set_grad(p, "x", {g});
    adam_step(p, st);
  }
  CHECK(p.get("x").v[0] == doctest::Approx(x).epsilon(1e-15));
  CHECK(st.t() == 2);
}

TEST_CASE("adam: lr = 0 leaves parameters unchanged for any gradients") {
  AdamConfig cfg;
  cfg.lr = 0.0;
  ParamStore p;
  p.add("a", Tensor({3}, {1.0, -2.0, 0.5}));
  p.add("b", Tensor({2}, {4.0, 4.0}));
  AdamState st(p, cfg);
  for (int step = 0; step < 3; ++step) {
    set_grad(p, "a", {0.3 * step, -5.0, 1e6});
    set_grad(p, "b", {-1.0, 2.0});
    adam_step(p, st);
  }
  CHECK(p.get("a").v == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(p.get("b").v == std::vector<double>{4.0, 4.0});
}

TEST_CASE("adam: missing gradient is a usage error") {
  ParamStore p;
  p.add("a", Tensor({1}, {1.0}));
  p.add("b", Tensor({1}, {2.0}));
  AdamState st(p, {});
  set_grad(p, "a", {1.0});
  CHECK_THROWS_AS(adam_step(p, st), UsageError);
}
