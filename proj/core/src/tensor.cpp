#include "gmgan/tensor.hpp"

#include <sstream>

namespace gmgan {

Tensor::Tensor(std::vector<int64_t> shape_, std::vector<double> values)
    : shape(std::move(shape_)), v(std::move(values)) {
  if (shape_size(shape) != static_cast<int64_t>(v.size()))
    throw DimError("tensor shape " + shape_string(shape) + " does not match " +
                   std::to_string(v.size()) + " values");
}

Tensor Tensor::zeros(std::vector<int64_t> shape) {
  const int64_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
  const int64_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  const int64_t n = static_cast<int64_t>(values.size());
  return Tensor({1, n}, std::move(values));
}

int64_t Tensor::rows() const {
  if (shape.size() != 2) throw DimError("expected matrix, got shape " + shape_string(shape));
  return shape[0];
}

int64_t Tensor::cols() const {
  if (shape.size() != 2) throw DimError("expected matrix, got shape " + shape_string(shape));
  return shape[1];
}

double& Tensor::at(int64_t i, int64_t j) { return v[static_cast<size_t>(i * cols() + j)]; }

double Tensor::at(int64_t i, int64_t j) const { return v[static_cast<size_t>(i * cols() + j)]; }

void Tensor::ensure_grad() {
  if (!grad) grad.emplace(v.size(), 0.0);
}

void Tensor::clear_grad() { grad.reset(); }

int64_t shape_size(std::span<const int64_t> shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw DimError("negative dimension in shape " + shape_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_string(std::span<const int64_t> shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool all_finite(std::span<const double> values) {
  for (double x : values)
    if (!std::isfinite(x)) return false;
  return true;
}

void ensure_finite(const Tensor& t, const std::string& what) { ensure_finite(t.v, what); }

void ensure_finite(std::span<const double> values, const std::string& what) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw NumericError("non-finite value in " + what + " at index " + std::to_string(i));
  }
}

}  // namespace gmgan
