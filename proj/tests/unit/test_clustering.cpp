#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmgan/clustering.hpp"

using namespace gmgan;

namespace {

// Expands a contingency table into label/cluster vectors.
void expand(const std::vector<std::vector<int64_t>>& table, std::vector<int>& y,
            std::vector<int>& c) {
  y.clear();
  c.clear();
  for (size_t i = 0; i < table.size(); ++i)
    for (size_t j = 0; j < table[i].size(); ++j)
      for (int64_t n = 0; n < table[i][j]; ++n) {
        y.push_back(static_cast<int>(i));
        c.push_back(static_cast<int>(j));
      }
}

}  // namespace

TEST_CASE("acc: the [[5,1],[2,4]] table scores 0.75") {
  std::vector<int> y, c;
  expand({{5, 1}, {2, 4}}, y, c);
  const ContingencyTable t = ContingencyTable::build(y, c, 2, 2);
  CHECK(acc_brute_force(t) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(acc_assignment(t) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(acc(y, c, 2, 2) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("acc: clusters equal to a relabeling of the truth score 1") {
  std::vector<int> y{0, 1, 2, 0, 1, 2, 2, 1};
  std::vector<int> c(y.size());
  const int relabel[3] = {2, 0, 1};
  for (size_t i = 0; i < y.size(); ++i) c[i] = relabel[y[i]];
  CHECK(acc(y, c, 3, 3) == doctest::Approx(1.0));
  CHECK(nmi(y, c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("acc: assignment solver equals brute force on random tables") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t N = 2 + rng.uniform_index(5);  // up to 6
    const int64_t K = 2 + rng.uniform_index(5);
    ContingencyTable t;
    t.n_true = N;
    t.n_cluster = K;
    t.counts.resize(static_cast<size_t>(N * K));
    int64_t total = 0;
    for (auto& x : t.counts) {
      x = rng.uniform_index(9);
      total += x;
    }
    if (total == 0) t.counts[0] = 1;
    CHECK(acc_assignment(t) == doctest::Approx(acc_brute_force(t)).epsilon(1e-15));
  }
}

TEST_CASE("acc: padding handles K != N and keeps the trivial lower bound") {
  // 3 classes, 2 clusters.
  std::vector<int> y{0, 0, 0, 1, 1, 2};
  std::vector<int> c{0, 0, 1, 1, 1, 0};
  const double a = acc(y, c, 3, 2);
  // Largest class frequency bound.
  CHECK(a >= 3.0 / 6.0 - 1e-12);
  CHECK(a == doctest::Approx((2 + 2) / 6.0));

  // 2 classes, 4 clusters.
  std::vector<int> y2{0, 0, 1, 1};
  std::vector<int> c2{0, 1, 2, 3};
  CHECK(acc(y2, c2, 2, 4) == doctest::Approx(0.5));
}

TEST_CASE("acc and nmi are invariant to cluster relabeling and sample order") {
  Rng rng(2);
  std::vector<int> y, c;
  for (int i = 0; i < 200; ++i) {
    y.push_back(static_cast<int>(rng.uniform_index(4)));
    c.push_back(static_cast<int>(rng.uniform_index(4)));
  }
  const double a0 = acc(y, c, 4, 4);
  const double n0 = nmi(y, c);

  const int relabel[4] = {3, 2, 1, 0};
  std::vector<int> c2(c.size());
  for (size_t i = 0; i < c.size(); ++i) c2[i] = relabel[c[i]];
  CHECK(acc(y, c2, 4, 4) == doctest::Approx(a0).epsilon(1e-12));
  CHECK(nmi(y, c2) == doctest::Approx(n0).epsilon(1e-12));

  std::vector<size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<size_t>(rng.uniform_index(static_cast<int64_t>(i + 1)))]);
  std::vector<int> yp(y.size()), cp(c.size());
  for (size_t i = 0; i < order.size(); ++i) {
    yp[i] = y[order[i]];
    cp[i] = c[order[i]];
  }
  CHECK(acc(yp, cp, 4, 4) == doctest::Approx(a0).epsilon(1e-12));
  CHECK(nmi(yp, cp) == doctest::Approx(n0).epsilon(1e-12));
}

TEST_CASE("nmi: identical, independent, and oracle-checked tables") {
  std::vector<int> y{0, 0, 1, 1, 2, 2};
  CHECK(nmi(y, y) == doctest::Approx(1.0).epsilon(1e-12));

  // Product table => zero mutual information.
  std::vector<int> yi, ci;
  expand({{2, 2}, {2, 2}}, yi, ci);
  CHECK(nmi(yi, ci) == doctest::Approx(0.0).epsilon(1e-12));

  // [[5,1],[2,4]] against a direct p log p oracle.
  std::vector<int> yt, ct;
  expand({{5, 1}, {2, 4}}, yt, ct);
  const double n = 12.0;
  const double joint[2][2] = {{5 / n, 1 / n}, {2 / n, 4 / n}};
  const double py[2] = {6 / n, 6 / n};
  const double pc[2] = {7 / n, 5 / n};
  double mi = 0.0, hy = 0.0, hc = 0.0;
  for (int i = 0; i < 2; ++i) {
    hy -= py[i] * std::log(py[i]);
    hc -= pc[i] * std::log(pc[i]);
    for (int j = 0; j < 2; ++j) mi += joint[i][j] * std::log(joint[i][j] / (py[i] * pc[j]));
  }
  CHECK(nmi(yt, ct) == doctest::Approx(mi / std::sqrt(hy * hc)).epsilon(1e-12));

  // Symmetry.
  CHECK(nmi(yt, ct) == doctest::Approx(nmi(ct, yt)).epsilon(1e-15));
}

TEST_CASE("nmi: degenerate marginals") {
  std::vector<int> one(5, 0);
  CHECK(nmi(one, one) == 1.0);
  std::vector<int> spread{0, 1, 2, 0, 1};
  CHECK(nmi(one, spread) == 0.0);
  CHECK(nmi(spread, one) == 0.0);
  CHECK_THROWS_AS(nmi({0, 1}, {0}), DimError);
}

TEST_CASE("generate_labeled_synthetic: exact per-component counts and labels") {
  Rng init(3);
  MixturePrior prior = MixturePrior::init_static(9, 4, 0.1, 0.15, init);
  MlpSpec gen = MlpSpec::make({4, 8, 2}, Act::Tanh);
  MlpSpec disc = MlpSpec::make({2, 8, 1}, Act::Sigmoid);
  Rng wrng(4);
  GanModel model = make_gan(gen, disc, GanMode::Unsupervised, 1, LabelMap::make(9, 1), wrng);

  Rng rng(5);
  Dataset synth = generate_labeled_synthetic(model, prior, 1, rng);
  CHECK(synth.size() == 9);
  for (int64_t k = 0; k < 9; ++k) CHECK(synth.label(k) == k);

  Rng rng2(6);
  Dataset more = generate_labeled_synthetic(model, prior, 7, rng2);
  CHECK(more.size() == 63);
  std::vector<int64_t> counts(9, 0);
  for (int64_t i = 0; i < more.size(); ++i) ++counts[static_cast<size_t>(more.label(i))];
  for (int64_t c : counts) CHECK(c == 7);

  CHECK_THROWS_AS(generate_labeled_synthetic(model, prior, 0, rng2), ParamError);
}

TEST_CASE("zero-weight generator: identical samples, labels still distinct") {
  Rng init(7);
  MixturePrior prior = MixturePrior::init_static(3, 4, 0.1, 0.15, init);
  MlpSpec gen = MlpSpec::make({4, 8, 2}, Act::Tanh);
  MlpSpec disc = MlpSpec::make({2, 8, 1}, Act::Sigmoid);
  Rng wrng(8);
  GanModel model = make_gan(gen, disc, GanMode::Unsupervised, 1, LabelMap::make(3, 1), wrng, 0.0);
  Rng rng(9);
  Dataset synth = generate_labeled_synthetic(model, prior, 4, rng);
  for (double v : synth.samples().v) CHECK(v == 0.0);
  CHECK(synth.label(0) == 0);
  CHECK(synth.label(11) == 2);
}

TEST_CASE("cluster: degenerate one-point dataset lands in a single cluster") {
  Tensor samples = Tensor::zeros({40, 2});
  for (int64_t i = 0; i < 40; ++i) {
    samples.at(i, 0) = 0.25;
    samples.at(i, 1) = -0.5;
  }
  Dataset ds(samples, std::nullopt, Modality::Points);
  TrainConfig tc;
  tc.K = 3;
  tc.d = 4;
  tc.iters = 5;
  tc.b_d = 8;
  tc.b_g = 8;
  tc.g_hidden = {8};
  tc.d_hidden = {8};
  ClassifierConfig cc;
  cc.hidden = {8};
  cc.epochs = 2;
  ClusterResult r = cluster(ds, 3, 20, tc, cc, 123);
  for (int h : r.hard) CHECK(h == r.hard[0]);
  CHECK(!r.acc);
}

TEST_CASE("cluster: K = 1 gives one cluster and ACC = max class share") {
  Rng rng(11);
  Dataset ds = gen_toy(200, 0.1, rng);
  TrainConfig tc;
  tc.K = 1;
  tc.d = 4;
  tc.iters = 2;
  tc.b_d = 8;
  tc.b_g = 8;
  tc.g_hidden = {8};
  tc.d_hidden = {8};
  ClassifierConfig cc;
  ClusterResult r = cluster(ds, 1, 10, tc, cc, 9);
  for (int h : r.hard) CHECK(h == 0);
  std::vector<int64_t> counts(9, 0);
  for (int64_t i = 0; i < ds.size(); ++i) ++counts[static_cast<size_t>(ds.label(i))];
  const double max_share =
      static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
      static_cast<double>(ds.size());
  REQUIRE(r.acc);
  CHECK(*r.acc == doctest::Approx(max_share).epsilon(1e-12));
}

TEST_CASE("cluster: smoke run on the toy set produces sane metrics") {
  Rng rng(13);
  Dataset ds = gen_toy(400, 0.1, rng);
  TrainConfig tc;
  tc.K = 9;
  tc.d = 8;
  tc.iters = 30;
  tc.b_d = 16;
  tc.b_g = 16;
  tc.g_hidden = {16};
  tc.d_hidden = {16};
  ClassifierConfig cc;
  cc.hidden = {16};
  cc.epochs = 3;
  ClusterResult r = cluster(ds, 9, 50, tc, cc, 17);
  REQUIRE(r.acc);
  REQUIRE(r.nmi);
  CHECK(*r.acc >= 1.0 / 9.0 - 1e-9);  // no worse than chance floor
  CHECK(*r.acc <= 1.0);
  CHECK(*r.nmi >= 0.0);
  CHECK(*r.nmi <= 1.0);
  CHECK(r.soft.rows() == ds.size());
  CHECK(r.soft.cols() == 9);
  for (int64_t i = 0; i < r.soft.rows(); ++i) {
    int best = 0;
    for (int64_t j = 1; j < 9; ++j)
      if (r.soft.at(i, j) > r.soft.at(i, best)) best = static_cast<int>(j);
    CHECK(r.hard[static_cast<size_t>(i)] == best);
  }
}
