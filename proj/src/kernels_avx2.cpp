#include "cskit/kernels.hpp"

#if defined(CSKIT_HAVE_AVX2_VARIANT)

#include <immintrin.h>

#include <cmath>
#include <cstring>

// AVX2+FMA kernels. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless avx2_supported() is true.
//
// Accumulator counts follow the usual latency-hiding rule: four independent
// FMA chains for reductions, a 4x8 register tile for gemm.

namespace cskit::kern::avx2 {

namespace {

inline double hsum(__m256d v) noexcept {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8),
                           _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12),
                           _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  }
  double total = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1),
                                    _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum_sq(const double* a, std::size_t n) noexcept {
  return dot(a, a, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(
        y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                               _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(
        y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4),
                                   _mm256_loadu_pd(y + i + 4)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard(const double* a, const double* b, double* out,
              std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void soft_threshold(const double* x, double lambda, double* out,
                    std::size_t n) noexcept {
  const __m256d vlam = _mm256_set1_pd(lambda);
  const __m256d signbit = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d mag =
        _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(signbit, v), vlam), zero);
    _mm256_storeu_pd(out + i, _mm256_or_pd(mag, _mm256_and_pd(v, signbit)));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(x[i]) - lambda;
    out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
}

void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) noexcept {
  std::size_t i = 0;
  // Four rows per pass share the streamed loads of x.
  for (; i + 4 <= m; i += 4) {
    const double* r0 = a + (i + 0) * n;
    const double* r1 = a + (i + 1) * n;
    const double* r2 = a + (i + 2) * n;
    const double* r3 = a + (i + 3) * n;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d vx = _mm256_loadu_pd(x + j);
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + j), vx, acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + j), vx, acc1);
      acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + j), vx, acc2);
      acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + j), vx, acc3);
    }
    double s0 = hsum(acc0), s1 = hsum(acc1), s2 = hsum(acc2), s3 = hsum(acc3);
    for (; j < n; ++j) {
      s0 += r0[j] * x[j];
      s1 += r1[j] * x[j];
      s2 += r2[j] * x[j];
      s3 += r3[j] * x[j];
    }
    y[i + 0] = s0;
    y[i + 1] = s1;
    y[i + 2] = s2;
    y[i + 3] = s3;
  }
  for (; i < m; ++i) y[i] = dot(a + i * n, x, n);
}

void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) noexcept {
  std::memset(y, 0, n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) axpy(x[i], a + i * n, y, n);
}

void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) noexcept {
  std::memset(c, 0, m * n * sizeof(double));
  std::size_t j0 = 0;
  for (; j0 + 8 <= n; j0 += 8) {
    std::size_t i0 = 0;
    for (; i0 + 4 <= m; i0 += 4) {
      const double* a0 = a + (i0 + 0) * k;
      const double* a1 = a + (i0 + 1) * k;
      const double* a2 = a + (i0 + 2) * k;
      const double* a3 = a + (i0 + 3) * k;
      __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
      __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
      __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
      __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n + j0;
        const __m256d b0 = _mm256_loadu_pd(brow);
        const __m256d b1 = _mm256_loadu_pd(brow + 4);
        __m256d va = _mm256_set1_pd(a0[p]);
        c00 = _mm256_fmadd_pd(va, b0, c00);
        c01 = _mm256_fmadd_pd(va, b1, c01);
        va = _mm256_set1_pd(a1[p]);
        c10 = _mm256_fmadd_pd(va, b0, c10);
        c11 = _mm256_fmadd_pd(va, b1, c11);
        va = _mm256_set1_pd(a2[p]);
        c20 = _mm256_fmadd_pd(va, b0, c20);
        c21 = _mm256_fmadd_pd(va, b1, c21);
        va = _mm256_set1_pd(a3[p]);
        c30 = _mm256_fmadd_pd(va, b0, c30);
        c31 = _mm256_fmadd_pd(va, b1, c31);
      }
      double* c0 = c + (i0 + 0) * n + j0;
      double* c1 = c + (i0 + 1) * n + j0;
      double* c2 = c + (i0 + 2) * n + j0;
      double* c3 = c + (i0 + 3) * n + j0;
      _mm256_storeu_pd(c0, c00);
      _mm256_storeu_pd(c0 + 4, c01);
      _mm256_storeu_pd(c1, c10);
      _mm256_storeu_pd(c1 + 4, c11);
      _mm256_storeu_pd(c2, c20);
      _mm256_storeu_pd(c2 + 4, c21);
      _mm256_storeu_pd(c3, c30);
      _mm256_storeu_pd(c3 + 4, c31);
    }
    // Leftover rows for this column block.
    for (; i0 < m; ++i0) {
      const double* arow = a + i0 * k;
      __m256d cc0 = _mm256_setzero_pd();
      __m256d cc1 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n + j0;
        const __m256d va = _mm256_set1_pd(arow[p]);
        cc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow), cc0);
        cc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow + 4), cc1);
      }
      _mm256_storeu_pd(c + i0 * n + j0, cc0);
      _mm256_storeu_pd(c + i0 * n + j0 + 4, cc1);
    }
  }
  // Leftover columns, scalar.
  if (j0 < n) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = a + i * k;
      double* crow = c + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = arow[p];
        const double* brow = b + p * n;
        for (std::size_t j = j0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
  }
}

}  // namespace cskit::kern::avx2

#endif  // CSKIT_HAVE_AVX2_VARIANT
