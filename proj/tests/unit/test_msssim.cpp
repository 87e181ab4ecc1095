#include <doctest.h>

#include <cmath>

#include "gmgan/msssim.hpp"
#include "gmgan/rng.hpp"
#include "gmgan/scores.hpp"

using namespace gmgan;

namespace {

Tensor random_image(Rng& rng, int64_t h, int64_t w) {
  Tensor img = Tensor::zeros({h, w});
  for (double& x : img.v) x = rng.uniform(-1.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("scale fitting: 28x28 uses exactly two scales with an 11-tap window") {
  MsSsimParams p;
  CHECK(usable_scales(28, 28, p) == 2);
  CHECK(usable_scales(11, 11, p) == 1);
  CHECK(usable_scales(10, 28, p) == 0);
  CHECK(usable_scales(512, 512, p) == 5);
}

TEST_CASE("identical images score exactly one") {
  Rng rng(1);
  Tensor img = random_image(rng, 28, 28);
  CHECK(std::abs(ms_ssim_raw(img, img) - 1.0) <= 1e-12);
  CHECK(std::abs(ms_ssim(img, img) - 1.0) <= 1e-9);
}

TEST_CASE("symmetry within 1e-12") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor a = random_image(rng, 28, 28);
    Tensor b = random_image(rng, 28, 28);
    CHECK(std::abs(ms_ssim(a, b) - ms_ssim(b, a)) <= 1e-12);
    CHECK(std::abs(ms_ssim_raw(a, b) - ms_ssim_raw(b, a)) <= 1e-12);
  }
}

TEST_CASE("an image against its negative goes below zero raw, zero clamped") {
  // Zero-mean checkerboard: luminance term stays positive while the
  // structure term is perfectly anti-correlated.
  Tensor img = Tensor::zeros({28, 28});
  for (int64_t y = 0; y < 28; ++y)
    for (int64_t x = 0; x < 28; ++x)
      img.v[static_cast<size_t>(y * 28 + x)] = ((x + y) % 2 == 0) ? 1.0 : -1.0;
  Tensor neg = img;
  for (double& v : neg.v) v = -v;
  CHECK(ms_ssim_raw(img, neg) < 0.0);
  CHECK(ms_ssim(img, neg) == 0.0);
}

TEST_CASE("values land in [0,1] after clamping and respond to noise") {
  Rng rng(3);
  Tensor img = random_image(rng, 28, 28);
  Tensor noisy = img;
  for (double& v : noisy.v) v = std::clamp(v + 0.1 * rng.normal(), -1.0, 1.0);
  const double s = ms_ssim(img, noisy);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
}

TEST_CASE("too-small images are rejected") {
  Tensor tiny = Tensor::zeros({8, 8});
  CHECK_THROWS_AS(ms_ssim(tiny, tiny), ParamError);
  Tensor a = Tensor::zeros({28, 28});
  Tensor b = Tensor::zeros({14, 14});
  CHECK_THROWS_AS(ms_ssim(a, b), DimError);
}

TEST_CASE("multi-channel images average the per-channel scores") {
  Rng rng(4);
  Tensor mono = random_image(rng, 16, 16);
  Tensor tri = Tensor::zeros({16, 16, 3});
  for (int64_t i = 0; i < 16 * 16; ++i)
    for (int64_t c = 0; c < 3; ++c) tri.v[static_cast<size_t>(i * 3 + c)] = mono.v[static_cast<size_t>(i)];
  CHECK(ms_ssim(tri, tri) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("d_intra: degenerate sets and the literal self-pair formula") {
  Rng rng(5);
  Tensor img = random_image(rng, 16, 16);
  // |X| = 1: the single self-pair contributes 1, so d_intra = 0.
  Tensor one = Tensor::zeros({1, 256});
  std::copy(img.v.begin(), img.v.end(), one.v.begin());
  CHECK(d_intra(one, 16, 16, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // All-identical set: every pair scores 1.
  Tensor four = Tensor::zeros({4, 256});
  for (int i = 0; i < 4; ++i)
    std::copy(img.v.begin(), img.v.end(), four.v.begin() + i * 256);
  CHECK(d_intra(four, 16, 16, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("d_intra equals the brute-force 16-pair summation") {
  Rng rng(6);
  const int n = 4;
  Tensor X = Tensor::zeros({n, 256});
  std::vector<Tensor> imgs;
  for (int i = 0; i < n; ++i) {
    Tensor img = random_image(rng, 16, 16);
    std::copy(img.v.begin(), img.v.end(), X.v.begin() + i * 256);
    imgs.push_back(img);
  }
  // Literal double sum over X x X, including self-pairs.
  double brute = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) brute += ms_ssim(imgs[static_cast<size_t>(i)], imgs[static_cast<size_t>(j)]);
  const double want = 1.0 - brute / (n * n);
  CHECK(d_intra(X, 16, 16, 1) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("d_intra is invariant under reordering of the set") {
  Rng rng(7);
  const int n = 5;
  Tensor X = Tensor::zeros({n, 256});
  for (int i = 0; i < n; ++i) {
    Tensor img = random_image(rng, 16, 16);
    std::copy(img.v.begin(), img.v.end(), X.v.begin() + i * 256);
  }
  Tensor Xr = Tensor::zeros({n, 256});
  const int order[n] = {3, 1, 4, 0, 2};
  for (int i = 0; i < n; ++i)
    std::copy(X.v.begin() + order[i] * 256, X.v.begin() + (order[i] + 1) * 256,
              Xr.v.begin() + i * 256);
  CHECK(std::abs(d_intra(X, 16, 16, 1) - d_intra(Xr, 16, 16, 1)) <= 1e-12);
}

TEST_CASE("d_intra refuses point data") {
  Rng rng(8);
  Dataset toy = gen_toy(10, 0.1, rng);
  CHECK_THROWS_AS(d_intra(toy, toy.samples()), ModalityError);
}
