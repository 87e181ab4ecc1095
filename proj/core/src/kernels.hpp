#pragma once

#include <cstdint>

// Dense double-precision matmul kernels, single-threaded. The ikj/dot
// orderings keep the innermost loop contiguous so the compiler vectorizes
// them; at the layer sizes used here this runs within a small factor of
// peak, which is all the training loop needs.
namespace gmgan::detail {

// C[n x m] (+)= A[n x k] * B[k x m]
void mm_nn(double* C, const double* A, const double* B, int64_t n, int64_t k, int64_t m,
           bool accumulate);

// C[n x m] (+)= A[n x k] * B^T, with B stored [m x k]
void mm_nt(double* C, const double* A, const double* B, int64_t n, int64_t k, int64_t m,
           bool accumulate);

// C[n x m] (+)= A^T * B, with A stored [k x n], B stored [k x m]
void mm_tn(double* C, const double* A, const double* B, int64_t n, int64_t k, int64_t m,
           bool accumulate);

}  // namespace gmgan::detail
