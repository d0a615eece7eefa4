#pragma once

#include <cstddef>

// Low-level dense kernels. Every operation has a portable scalar
// implementation and, on x86-64, an AVX2+FMA variant living in a separately
// compiled translation unit. The dispatched entry points below pick the best
// available variant once at startup; tests can pin a variant with force().
//
// All matrices are row-major with no padding.

namespace cskit::kern {

enum class Isa { scalar, avx2 };

// Variant currently behind the dispatched entry points.
Isa active() noexcept;

// Pin a variant. Throws ConfigError if the requested one cannot run on this
// machine. The CSKIT_ISA environment variable ("scalar"/"avx2") applies the
// same override at startup.
void force(Isa isa);

bool avx2_supported() noexcept;
const char* isa_name(Isa isa) noexcept;

// ---- dispatched entry points -----------------------------------------------

double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq(const double* a, std::size_t n) noexcept;
double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept;
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
// out = a .* b  (aliasing with either input is fine)
void hadamard(const double* a, const double* b, double* out,
              std::size_t n) noexcept;
// out_i = sign(x_i) * max(|x_i| - lambda, 0)
void soft_threshold(const double* x, double lambda, double* out,
                    std::size_t n) noexcept;
// y = A x   (A is m x n)
void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) noexcept;
// y = A^T x (A is m x n, x has length m, y has length n)
void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) noexcept;
// C = A B   (A is m x k, B is k x n, C is m x n; C must not alias A or B)
void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) noexcept;

// ---- per-variant implementations (exposed for equivalence tests) -----------

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq(const double* a, std::size_t n) noexcept;
double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void hadamard(const double* a, const double* b, double* out,
              std::size_t n) noexcept;
void soft_threshold(const double* x, double lambda, double* out,
                    std::size_t n) noexcept;
void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) noexcept;
void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) noexcept;
void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CSKIT_HAVE_AVX2_VARIANT 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq(const double* a, std::size_t n) noexcept;
double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void hadamard(const double* a, const double* b, double* out,
              std::size_t n) noexcept;
void soft_threshold(const double* x, double lambda, double* out,
                    std::size_t n) noexcept;
void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) noexcept;
void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) noexcept;
void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) noexcept;
}  // namespace avx2
#endif

}  // namespace cskit::kern
