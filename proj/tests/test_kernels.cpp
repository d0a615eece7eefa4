#include <cmath>
#include <vector>

#include "cskit/errors.hpp"
#include "cskit/kernels.hpp"
#include "cskit/rng.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using cskit::Rng;
namespace kern = cskit::kern;

namespace {

// Restores the dispatch choice that was active on entry.
struct IsaGuard {
  kern::Isa saved = kern::active();
  ~IsaGuard() { kern::force(saved); }
};

const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 7, 8,
                                         15, 16, 17, 33, 64, 251, 1024};

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar reductions match simple loops") {
  Rng rng(11);
  for (const std::size_t n : kSizes) {
    std::vector<double> a(n), b(n);
    testutil::fill_uniform(a, rng);
    testutil::fill_uniform(b, rng);
    double dot = 0.0, ss = 0.0, ssd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      ss += a[i] * a[i];
      const double d = a[i] - b[i];
      ssd += d * d;
    }
    CHECK(kern::scalar::dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-13));
    CHECK(kern::scalar::sum_sq(a.data(), n) == doctest::Approx(ss).epsilon(1e-13));
    CHECK(kern::scalar::sum_sq_diff(a.data(), b.data(), n) ==
          doctest::Approx(ssd).epsilon(1e-13));
  }
}

TEST_CASE("soft threshold basics") {
  const std::vector<double> x = {2.0, -0.5, 1.0, -3.0, 0.0};
  std::vector<double> out(x.size());
  kern::scalar::soft_threshold(x.data(), 1.0, out.data(), x.size());
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);
  CHECK(out[3] == -2.0);
  CHECK(out[4] == 0.0);
  kern::scalar::soft_threshold(x.data(), 0.0, out.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(out[i] == x[i]);
}

#if defined(CSKIT_HAVE_AVX2_VARIANT)
TEST_CASE("avx2 variants agree with scalar reference") {
  if (!kern::avx2_supported()) {
    MESSAGE("avx2 not available on this cpu, skipping");
    return;
  }
  Rng rng(23);
  for (const std::size_t n : kSizes) {
    std::vector<double> a(n), b(n);
    testutil::fill_uniform(a, rng, -2.0, 2.0);
    testutil::fill_uniform(b, rng, -2.0, 2.0);

    double scale = 1e-300;
    for (std::size_t i = 0; i < n; ++i) scale += std::fabs(a[i] * b[i]);
    CHECK(std::fabs(kern::avx2::dot(a.data(), b.data(), n) -
                    kern::scalar::dot(a.data(), b.data(), n)) <= 1e-13 * scale);
    CHECK(kern::avx2::sum_sq(a.data(), n) ==
          doctest::Approx(kern::scalar::sum_sq(a.data(), n)).epsilon(1e-12));
    CHECK(kern::avx2::sum_sq_diff(a.data(), b.data(), n) ==
          doctest::Approx(kern::scalar::sum_sq_diff(a.data(), b.data(), n))
              .epsilon(1e-12));

    std::vector<double> y1 = b, y2 = b;
    kern::scalar::axpy(0.37, a.data(), y1.data(), n);
    kern::avx2::axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));

    std::vector<double> h1(n), h2(n);
    kern::scalar::hadamard(a.data(), b.data(), h1.data(), n);
    kern::avx2::hadamard(a.data(), b.data(), h2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(h1[i] == h2[i]);

    std::vector<double> s1(n), s2(n);
    kern::scalar::soft_threshold(a.data(), 0.4, s1.data(), n);
    kern::avx2::soft_threshold(a.data(), 0.4, s2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);
  }
}

TEST_CASE("avx2 matrix kernels agree with scalar reference") {
  if (!kern::avx2_supported()) {
    MESSAGE("avx2 not available on this cpu, skipping");
    return;
  }
  Rng rng(31);
  const std::vector<std::size_t> dims = {1, 2, 3, 4, 5, 7, 8, 9, 13, 16, 31};
  for (const std::size_t m : dims) {
    for (const std::size_t n : dims) {
      std::vector<double> a(m * n), x(n), xt(m);
      testutil::fill_uniform(a, rng);
      testutil::fill_uniform(x, rng);
      testutil::fill_uniform(xt, rng);

      std::vector<double> y1(m), y2(m);
      kern::scalar::gemv(a.data(), m, n, x.data(), y1.data());
      kern::avx2::gemv(a.data(), m, n, x.data(), y2.data());
      for (std::size_t i = 0; i < m; ++i)
        CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));

      std::vector<double> z1(n), z2(n);
      kern::scalar::gemv_t(a.data(), m, n, xt.data(), z1.data());
      kern::avx2::gemv_t(a.data(), m, n, xt.data(), z2.data());
      for (std::size_t i = 0; i < n; ++i)
        CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-12));
    }
  }
  const std::vector<std::size_t> gd = {1, 2, 4, 7, 8, 12, 17, 24};
  for (const std::size_t m : gd)
    for (const std::size_t k : gd)
      for (const std::size_t n : gd) {
        std::vector<double> a(m * k), b(k * n), c1(m * n), c2(m * n);
        testutil::fill_uniform(a, rng);
        testutil::fill_uniform(b, rng);
        kern::scalar::gemm(a.data(), b.data(), c1.data(), m, k, n);
        kern::avx2::gemm(a.data(), b.data(), c2.data(), m, k, n);
        const double tol = 1e-13 * static_cast<double>(k) + 1e-15;
        for (std::size_t i = 0; i < m * n; ++i)
          CHECK(std::fabs(c1[i] - c2[i]) <= tol);
      }
}
#endif  // CSKIT_HAVE_AVX2_VARIANT

TEST_CASE("dispatch override routes to the requested variant") {
  IsaGuard guard;
  kern::force(kern::Isa::scalar);
  CHECK(kern::active() == kern::Isa::scalar);

  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {4.0, 5.0, 6.0};
  CHECK(kern::dot(a.data(), b.data(), 3) == 32.0);

  if (kern::avx2_supported()) {
    kern::force(kern::Isa::avx2);
    CHECK(kern::active() == kern::Isa::avx2);
    CHECK(kern::dot(a.data(), b.data(), 3) == 32.0);
  } else {
    CHECK_THROWS_AS(kern::force(kern::Isa::avx2), cskit::ConfigError);
  }
}

TEST_CASE("isa names") {
  CHECK(std::string(kern::isa_name(kern::Isa::scalar)) == "scalar");
  CHECK(std::string(kern::isa_name(kern::Isa::avx2)) == "avx2");
}

TEST_SUITE_END();
