#include "cskit/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "cskit/errors.hpp"

namespace cskit::kern {

namespace {

bool detect_avx2() noexcept {
#if defined(CSKIT_HAVE_AVX2_VARIANT) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa default_isa() noexcept {
  Isa isa = detect_avx2() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("CSKIT_ISA")) {
    if (std::strcmp(env, "scalar") == 0) isa = Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && detect_avx2()) isa = Isa::avx2;
  }
  return isa;
}

Isa& active_ref() noexcept {
  static Isa isa = default_isa();
  return isa;
}

}  // namespace

bool avx2_supported() noexcept { return detect_avx2(); }

Isa active() noexcept { return active_ref(); }

void force(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported())
    throw ConfigError("avx2 kernels not supported on this cpu");
  active_ref() = isa;
}

const char* isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

#if defined(CSKIT_HAVE_AVX2_VARIANT)
#define CSKIT_DISPATCH(fn, ...)                                     \
  (active_ref() == Isa::avx2 ? avx2::fn(__VA_ARGS__)                \
                             : scalar::fn(__VA_ARGS__))
#else
#define CSKIT_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) noexcept {
  return CSKIT_DISPATCH(dot, a, b, n);
}

double sum_sq(const double* a, std::size_t n) noexcept {
  return CSKIT_DISPATCH(sum_sq, a, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) noexcept {
  return CSKIT_DISPATCH(sum_sq_diff, a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  CSKIT_DISPATCH(axpy, alpha, x, y, n);
}

void hadamard(const double* a, const double* b, double* out,
              std::size_t n) noexcept {
  CSKIT_DISPATCH(hadamard, a, b, out, n);
}

void soft_threshold(const double* x, double lambda, double* out,
                    std::size_t n) noexcept {
  CSKIT_DISPATCH(soft_threshold, x, lambda, out, n);
}

void gemv(const double* a, std::size_t m, std::size_t n, const double* x,
          double* y) noexcept {
  CSKIT_DISPATCH(gemv, a, m, n, x, y);
}

void gemv_t(const double* a, std::size_t m, std::size_t n, const double* x,
            double* y) noexcept {
  CSKIT_DISPATCH(gemv_t, a, m, n, x, y);
}

void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) noexcept {
  CSKIT_DISPATCH(gemm, a, b, c, m, k, n);
}

#undef CSKIT_DISPATCH

}  // namespace cskit::kern
