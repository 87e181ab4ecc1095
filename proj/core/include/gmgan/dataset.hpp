#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmgan/rng.hpp"
#include "gmgan/tensor.hpp"

namespace gmgan {

enum class Modality { Points, Images };

// Per-feature affine transform into [-1, 1]; identity for data born in range.
struct NormRecord {
  bool identity = true;
  double scale = 1.0;   // x_norm = x_raw * scale + offset
  double offset = 0.0;
};

// Immutable sample container. Row access for training goes through fetch(),
// which counts reads so tests can assert exactly how much data the training
// loop touched.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Tensor samples, std::optional<std::vector<int>> labels, Modality modality);

  int64_t size() const { return samples_.rows(); }
  int64_t dim() const { return samples_.cols(); }
  Modality modality() const { return modality_; }

  bool labeled() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  int label(int64_t i) const;
  int64_t n_classes() const;  // 1 + max label

  // Copies row i into `out` and bumps the read counter.
  void fetch(int64_t i, std::span<double> out) const;
  uint64_t reads() const { return reads_; }
  void reset_reads() const { reads_ = 0; }

  const Tensor& samples() const { return samples_; }

  // Image geometry (Images modality only).
  int64_t height() const { return h_; }
  int64_t width() const { return w_; }
  int64_t channels() const { return ch_; }
  void set_image_dims(int64_t h, int64_t w, int64_t ch);

  const NormRecord& norm() const { return norm_; }
  void set_norm(NormRecord n) { norm_ = n; }

 private:
  Tensor samples_;  // [n x dim]
  std::optional<std::vector<int>> labels_;
  Modality modality_ = Modality::Points;
  int64_t h_ = 0, w_ = 0, ch_ = 0;
  NormRecord norm_;
  mutable uint64_t reads_ = 0;
};

double normalize_pixel(uint8_t raw);     // byte -> [-1, 1]
double denormalize_pixel(double value);  // inverse map (real-valued)

// 2-D toy set: 9 Gaussians with means {-1,0,1} x {-1,0,1}, covariance
// variance * I, uniform component choice, label = component index.
// Coordinates are kept raw (the data already sits inside [-1.5, 1.5]).
Dataset gen_toy(int64_t n, double variance, Rng& rng);

// Means of the toy mixture, component k at ((k % 3) - 1, (k / 3) - 1).
std::vector<Tensor> toy_means();
std::vector<Tensor> toy_covariances(double variance);
std::vector<double> toy_weights();

// Big-endian IDX containers: magic 0x00000803 for images (dims n, rows,
// cols, unsigned bytes), 0x00000801 for labels. Pixels map to [-1, 1] via
// x / 127.5 - 1. Malformed input raises FormatError naming the byte offset.
Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels = {});

// Stratified subset with exactly per_class samples from every class.
Dataset subset(const Dataset& ds, int64_t per_class, uint64_t seed);

// Deterministic 10-class 28x28 grayscale corpus of procedurally drawn
// glyphs (bars, crosses, rings, ...) with per-sample jitter and noise.
// Serves as a desk-scale stand-in where no real image corpus is available;
// produced through the same byte->[-1,1] path as IDX data.
Dataset make_synth_images(int64_t per_class, uint64_t seed);

}  // namespace gmgan
