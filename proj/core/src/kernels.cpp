#include "kernels.hpp"

#include <cstring>

namespace gmgan::detail {

void mm_nn(double* C, const double* A, const double* B, int64_t n, int64_t k, int64_t m,
           bool accumulate) {
  if (!accumulate) std::memset(C, 0, sizeof(double) * static_cast<size_t>(n * m));
  for (int64_t i = 0; i < n; ++i) {
    const double* a = A + i * k;
    double* c = C + i * m;
    for (int64_t l = 0; l < k; ++l) {
      const double al = a[l];
      const double* b = B + l * m;
      for (int64_t j = 0; j < m; ++j) c[j] += al * b[j];
    }
  }
}

void mm_nt(double* C, const double* A, const double* B, int64_t n, int64_t k, int64_t m,
           bool accumulate) {
  for (int64_t i = 0; i < n; ++i) {
    const double* a = A + i * k;
    double* c = C + i * m;
    for (int64_t j = 0; j < m; ++j) {
      const double* b = B + j * k;
      double acc = 0.0;
      for (int64_t l = 0; l < k; ++l) acc += a[l] * b[l];
      c[j] = accumulate ? c[j] + acc : acc;
    }
  }
}

void mm_tn(double* C, const double* A, const double* B, int64_t n, int64_t k, int64_t m,
           bool accumulate) {
  if (!accumulate) std::memset(C, 0, sizeof(double) * static_cast<size_t>(n * m));
  for (int64_t l = 0; l < k; ++l) {
    const double* a = A + l * n;
    const double* b = B + l * m;
    for (int64_t i = 0; i < n; ++i) {
      const double ai = a[i];
      double* c = C + i * m;
      for (int64_t j = 0; j < m; ++j) c[j] += ai * b[j];
    }
  }
}

}  // namespace gmgan::detail
