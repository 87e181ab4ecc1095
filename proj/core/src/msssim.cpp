#include "gmgan/msssim.hpp"

#include <algorithm>
#include <cmath>

namespace gmgan {

namespace {

struct Plane {
  int64_t h = 0, w = 0;
  std::vector<double> v;
  double at(int64_t y, int64_t x) const { return v[static_cast<size_t>(y * w + x)]; }
};

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<size_t>(size));
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[static_cast<size_t>(i)] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (double& x : k) x /= sum;
  return k;
}

// Separable valid-mode convolution with a symmetric 1-D kernel.
Plane conv_valid(const Plane& p, const std::vector<double>& k) {
  const int K = static_cast<int>(k.size());
  Plane rows;
  rows.h = p.h;
  rows.w = p.w - K + 1;
  rows.v.assign(static_cast<size_t>(rows.h * rows.w), 0.0);
  for (int64_t y = 0; y < rows.h; ++y)
    for (int64_t x = 0; x < rows.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < K; ++i) acc += k[static_cast<size_t>(i)] * p.at(y, x + i);
      rows.v[static_cast<size_t>(y * rows.w + x)] = acc;
    }
  Plane out;
  out.h = rows.h - K + 1;
  out.w = rows.w;
  out.v.assign(static_cast<size_t>(out.h * out.w), 0.0);
  for (int64_t y = 0; y < out.h; ++y)
    for (int64_t x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < K; ++i) acc += k[static_cast<size_t>(i)] * rows.at(y + i, x);
      out.v[static_cast<size_t>(y * out.w + x)] = acc;
    }
  return out;
}

Plane downsample2(const Plane& p) {
  Plane out;
  out.h = p.h / 2;
  out.w = p.w / 2;
  out.v.assign(static_cast<size_t>(out.h * out.w), 0.0);
  for (int64_t y = 0; y < out.h; ++y)
    for (int64_t x = 0; x < out.w; ++x)
      out.v[static_cast<size_t>(y * out.w + x)] =
          0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) +
                  p.at(2 * y + 1, 2 * x + 1));
  return out;
}

double spow(double base, double expnt) {
  return base >= 0.0 ? std::pow(base, expnt) : -std::pow(-base, expnt);
}

struct ScaleStats {
  double cs = 0.0;
  double luminance = 0.0;
};

ScaleStats scale_stats(const Plane& a, const Plane& b, const std::vector<double>& kernel,
                       double c1, double c2) {
  Plane a2 = a, b2 = b, ab = a;
  for (size_t i = 0; i < a.v.size(); ++i) {
    a2.v[i] = a.v[i] * a.v[i];
    b2.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const Plane mu_a = conv_valid(a, kernel);
  const Plane mu_b = conv_valid(b, kernel);
  const Plane m_a2 = conv_valid(a2, kernel);
  const Plane m_b2 = conv_valid(b2, kernel);
  const Plane m_ab = conv_valid(ab, kernel);

  double cs_sum = 0.0, lum_sum = 0.0;
  for (size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = m_a2.v[i] - ma * ma;
    const double vb = m_b2.v[i] - mb * mb;
    const double cov = m_ab.v[i] - ma * mb;
    cs_sum += (2.0 * cov + c2) / (va + vb + c2);
    lum_sum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
  }
  const double n = static_cast<double>(mu_a.v.size());
  return {cs_sum / n, lum_sum / n};
}

void split_dims(const Tensor& t, int64_t& h, int64_t& w, int64_t& c) {
  if (t.rank() == 2) {
    h = t.shape[0];
    w = t.shape[1];
    c = 1;
  } else if (t.rank() == 3) {
    h = t.shape[0];
    w = t.shape[1];
    c = t.shape[2];
  } else {
    throw DimError("ms_ssim expects [h x w] or [h x w x c] tensors");
  }
}

Plane extract_channel(const Tensor& t, int64_t h, int64_t w, int64_t channels, int64_t ch) {
  Plane p;
  p.h = h;
  p.w = w;
  p.v.resize(static_cast<size_t>(h * w));
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      p.v[static_cast<size_t>(y * w + x)] = t.v[static_cast<size_t>((y * w + x) * channels + ch)];
  return p;
}

}  // namespace

int usable_scales(int64_t h, int64_t w, const MsSsimParams& p) {
  int scales = 0;
  int64_t hh = h, ww = w;
  while (scales < static_cast<int>(p.scale_weights.size()) && hh >= p.window && ww >= p.window) {
    ++scales;
    hh /= 2;
    ww /= 2;
  }
  return scales;
}

double ms_ssim_raw(const Tensor& a, const Tensor& b, const MsSsimParams& p) {
  if (a.shape != b.shape)
    throw DimError("ms_ssim inputs must share a shape, got " + shape_string(a.shape) + " vs " +
                   shape_string(b.shape));
  int64_t h = 0, w = 0, channels = 0;
  split_dims(a, h, w, channels);
  const int scales = usable_scales(h, w, p);
  if (scales < 1)
    throw ParamError("image " + std::to_string(h) + "x" + std::to_string(w) +
                     " is smaller than one ms_ssim window");
  double weight_sum = 0.0;
  for (int j = 0; j < scales; ++j) weight_sum += p.scale_weights[static_cast<size_t>(j)];

  const auto kernel = gaussian_kernel(p.window, p.window_sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

  double total = 0.0;
  for (int64_t ch = 0; ch < channels; ++ch) {
    Plane pa = extract_channel(a, h, w, channels, ch);
    Plane pb = extract_channel(b, h, w, channels, ch);
    double score = 1.0;
    for (int j = 0; j < scales; ++j) {
      const ScaleStats st = scale_stats(pa, pb, kernel, c1, c2);
      const double wj = p.scale_weights[static_cast<size_t>(j)] / weight_sum;
      score *= spow(st.cs, wj);
      if (j == scales - 1) score *= spow(st.luminance, wj);
      if (j + 1 < scales) {
        pa = downsample2(pa);
        pb = downsample2(pb);
      }
    }
    total += score;
  }
  return total / static_cast<double>(channels);
}

double ms_ssim(const Tensor& a, const Tensor& b, const MsSsimParams& p) {
  return std::clamp(ms_ssim_raw(a, b, p), 0.0, 1.0);
}

}  // namespace gmgan
