#include "tna/kernels.hpp"

#include <cmath>

namespace tna::kern {

double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

void affine_nt(const double* X, std::size_t n, std::size_t k,
               const double* W, std::size_t m,
               const double* bias, double* C) {
#pragma omp parallel for schedule(static) if (n * m * k > 16384)
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = X + i * k;
        double* c = C + i * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double d = dot(x, W + j * k, k);
            c[j] = bias ? d + bias[j] : d;
        }
    }
}

void gemm_tn(const double* D, std::size_t n, std::size_t m,
             const double* X, std::size_t k, double* dW) {
#pragma omp parallel for schedule(static) if (n * m * k > 16384)
    for (std::size_t j = 0; j < m; ++j) {
        double* w = dW + j * k;
        for (std::size_t t = 0; t < k; ++t) w[t] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = D[i * m + j];
            if (d == 0.0) continue;
            const double* x = X + i * k;
            for (std::size_t t = 0; t < k; ++t) w[t] += d * x[t];
        }
    }
}

void gemm_nn(const double* D, std::size_t n, std::size_t m,
             const double* W, std::size_t k, double* dX) {
#pragma omp parallel for schedule(static) if (n * m * k > 16384)
    for (std::size_t i = 0; i < n; ++i) {
        const double* d = D + i * m;
        double* out = dX + i * k;
        for (std::size_t t = 0; t < k; ++t) out[t] = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double dj = d[j];
            if (dj == 0.0) continue;
            const double* w = W + j * k;
            for (std::size_t t = 0; t < k; ++t) out[t] += dj * w[t];
        }
    }
}

void col_sums(const double* D, std::size_t n, std::size_t m, double* out) {
#pragma omp parallel for schedule(static) if (n * m > 16384)
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += D[i * m + j];
        out[j] = s;
    }
}

void relu(const double* x, double* out, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 65536)
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* pre, double* grad, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 65536)
    for (std::size_t i = 0; i < n; ++i) {
        if (pre[i] <= 0.0) grad[i] = 0.0;
    }
}

bool all_finite(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) return false;
    }
    return true;
}

void lerp_vec(const double* a, const double* b, double alpha, double* out, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 65536)
    for (std::size_t i = 0; i < n; ++i) out[i] = lerp(a[i], b[i], alpha);
}

}  // namespace tna::kern
