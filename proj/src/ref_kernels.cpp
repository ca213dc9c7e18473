#include "tna/kernels.hpp"

namespace tna::ref {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void affine_nt(const double* X, std::size_t n, std::size_t k,
               const double* W, std::size_t m,
               const double* bias, double* C) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double s = bias ? bias[j] : 0.0;
            for (std::size_t t = 0; t < k; ++t) s += X[i * k + t] * W[j * k + t];
            C[i * m + j] = s;
        }
    }
}

void gemm_tn(const double* D, std::size_t n, std::size_t m,
             const double* X, std::size_t k, double* dW) {
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t t = 0; t < k; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += D[i * m + j] * X[i * k + t];
            dW[j * k + t] = s;
        }
    }
}

void gemm_nn(const double* D, std::size_t n, std::size_t m,
             const double* W, std::size_t k, double* dX) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += D[i * m + j] * W[j * k + t];
            dX[i * k + t] = s;
        }
    }
}

}  // namespace tna::ref
