#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmgan/error.hpp"

namespace gmgan {

// Dense row-major array of 64-bit floats with an optional gradient buffer of
// the same shape. The universal numeric carrier across the library.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> v;
  std::optional<std::vector<double>> grad;

  Tensor() = default;
  Tensor(std::vector<int64_t> shape_, std::vector<double> values);

  static Tensor zeros(std::vector<int64_t> shape);
  static Tensor full(std::vector<int64_t> shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);  // shape [1, n]

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  int64_t rank() const { return static_cast<int64_t>(shape.size()); }

  // 2-D accessors; throw DimError when the tensor is not a matrix.
  int64_t rows() const;
  int64_t cols() const;
  double& at(int64_t i, int64_t j);
  double at(int64_t i, int64_t j) const;

  void ensure_grad();            // allocate zeroed grad if absent
  void clear_grad();             // drop the gradient buffer
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

int64_t shape_size(std::span<const int64_t> shape);
std::string shape_string(std::span<const int64_t> shape);

bool all_finite(std::span<const double> values);

// Throws NumericError naming `what` if any entry is NaN/Inf.
void ensure_finite(const Tensor& t, const std::string& what);
void ensure_finite(std::span<const double> values, const std::string& what);

}  // namespace gmgan
