#include <cmath>
#include <cstring>

#include "cskit/kernels.hpp"

// Portable reference kernels. Kept deliberately simple: these define the
// semantics that the vectorized variants must reproduce, and they are the
// fallback on CPUs without AVX2.

namespace cskit::kern::scalar {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_sq(const double* a, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard(const double* a, const double* b, double* out,
              std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void soft_threshold(const double* x, double lambda, double* out,
                    std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::fabs(x[i]) - lambda;
    out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
}

void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) noexcept {
  for (std::size_t i = 0; i < m; ++i) y[i] = dot(a + i * n, x, n);
}

void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) noexcept {
  // Accumulate row-by-row so the matrix is streamed once in storage order.
  std::memset(y, 0, n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) axpy(x[i], a + i * n, y, n);
}

void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) noexcept {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy(arow[p], b + p * n, crow, n);
  }
}

}  // namespace cskit::kern::scalar
