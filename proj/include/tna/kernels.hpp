#pragma once

#include <cstddef>

#include "tna/matrix.hpp"

// Numeric kernels used by every module.  The OpenMP variants in tna::kern
// assign each output element to exactly one thread and keep the inner
// accumulation order fixed, so results are bit-identical for any thread
// count, including 1.  tna::ref holds plain serial implementations with a
// naive accumulation order; they exist as an independent oracle for tests
// and as the baseline for the kernel benchmark, and may differ from the
// parallel kernels by floating-point rounding only.

namespace tna::kern {

// Fixed-order dot product (4-way unrolled accumulators).
double dot(const double* a, const double* b, std::size_t n);

// Fixed-order left-to-right sum.
double sum(const double* a, std::size_t n);

// C (n x m) = X (n x k) * W^T, where W is (m x k); bias (length m) is added
// to every row when non-null.
void affine_nt(const double* X, std::size_t n, std::size_t k,
               const double* W, std::size_t m,
               const double* bias, double* C);

// dW (m x k) = D^T (from D n x m) * X (n x k).
void gemm_tn(const double* D, std::size_t n, std::size_t m,
             const double* X, std::size_t k, double* dW);

// dX (n x k) = D (n x m) * W (m x k).
void gemm_nn(const double* D, std::size_t n, std::size_t m,
             const double* W, std::size_t k, double* dX);

// out[j] = sum_i D[i][j] for D (n x m).
void col_sums(const double* D, std::size_t n, std::size_t m, double* out);

// out[i] = max(0, x[i]).
void relu(const double* x, double* out, std::size_t n);

// grad[i] = 0 where pre[i] <= 0 (ReLU subgradient convention sigma'(0) = 0).
void relu_backward(const double* pre, double* grad, std::size_t n);

bool all_finite(const double* x, std::size_t n);

// Convex combination with alpha weighting the FIRST argument:
// alpha * a + (1 - alpha) * b.  Equal inputs and endpoint alphas return the
// corresponding input bitwise, so interpolating identical points is exact.
inline double lerp(double a, double b, double alpha) {
    if (a == b) return a;
    if (alpha == 1.0) return a;
    if (alpha == 0.0) return b;
    return alpha * a + (1.0 - alpha) * b;
}

void lerp_vec(const double* a, const double* b, double alpha, double* out, std::size_t n);

}  // namespace tna::kern

namespace tna::ref {

double dot(const double* a, const double* b, std::size_t n);
void affine_nt(const double* X, std::size_t n, std::size_t k,
               const double* W, std::size_t m,
               const double* bias, double* C);
void gemm_tn(const double* D, std::size_t n, std::size_t m,
             const double* X, std::size_t k, double* dW);
void gemm_nn(const double* D, std::size_t n, std::size_t m,
             const double* W, std::size_t k, double* dX);

}  // namespace tna::ref
