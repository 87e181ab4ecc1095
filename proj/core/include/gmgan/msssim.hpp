#pragma once

#include <cstdint>
#include <vector>

#include "gmgan/tensor.hpp"

namespace gmgan {

struct MsSsimParams {
  // Reference 5-scale weights; renormalized over the scales that fit.
  std::vector<double> scale_weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int window = 11;
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 2.0;  // data in [-1, 1]
};

// Number of dyadic scales at which the window still fits.
int usable_scales(int64_t h, int64_t w, const MsSsimParams& p = {});

// Multi-scale structural similarity. Inputs carry shape [h x w] or
// [h x w x c]; channels are scored independently and averaged. Contrast and
// structure are measured at every scale, luminance at the coarsest, and the
// terms combine geometrically with sign-preserving powers (raw values can
// be negative for anti-correlated images).
double ms_ssim_raw(const Tensor& a, const Tensor& b, const MsSsimParams& p = {});

// Raw value clamped to [0, 1]; this is what the diversity score consumes.
double ms_ssim(const Tensor& a, const Tensor& b, const MsSsimParams& p = {});

}  // namespace gmgan
