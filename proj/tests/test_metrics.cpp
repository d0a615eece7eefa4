#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cskit/errors.hpp"
#include "cskit/metrics.hpp"
#include "cskit/rng.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace cskit;

namespace {

// Naive SSIM over valid windows, written independently from the library
// version: build the weight vector, walk every window position, accumulate
// weighted population stats.
double ssim_oracle_1d(const la::Vec& x, const la::Vec& y, double range,
                      const SsimParams& p) {
  std::size_t win = p.window;
  std::vector<double> wgt;
  if (x.size() < p.window) {
    win = x.size();
    wgt.assign(win, 1.0 / static_cast<double>(win));
  } else {
    wgt.resize(win);
    const double c = (static_cast<double>(win) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
      const double d = static_cast<double>(i) - c;
      wgt[i] = std::exp(-d * d / (2.0 * p.sigma * p.sigma));
      total += wgt[i];
    }
    for (double& w : wgt) w /= total;
  }
  const double c1 = (p.k1 * range) * (p.k1 * range);
  const double c2 = (p.k2 * range) * (p.k2 * range);
  double acc = 0.0;
  const std::size_t count = x.size() - win + 1;
  for (std::size_t s = 0; s < count; ++s) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
      mx += wgt[i] * x[s + i];
      my += wgt[i] * y[s + i];
    }
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
      vx += wgt[i] * (x[s + i] - mx) * (x[s + i] - mx);
      vy += wgt[i] * (y[s + i] - my) * (y[s + i] - my);
      cov += wgt[i] * (x[s + i] - mx) * (y[s + i] - my);
    }
    acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("mse hand values") {
  CHECK(mse(la::Vec{1, 2, 3}, la::Vec{1, 2, 3}) == 0.0);
  CHECK(mse(la::Vec{0, 0, 0, 0}, la::Vec{1, 1, 1, 1}) == 1.0);
  CHECK(mse(la::Vec{1, 2}, la::Vec{4, -2}) ==
        doctest::Approx((9.0 + 16.0) / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(mse(la::Vec{1.0}, la::Vec{1.0, 2.0}), DimensionError);

  la::Mat a(2, 2), b(2, 2);
  a.a = {1, 2, 3, 4};
  b.a = {1, 2, 3, 6};
  CHECK(mse(a, b) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("psnr hand values") {
  // mse 0.01 on range 1: 10*log10(1/0.01) = 20 dB.
  CHECK(psnr(0.01, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(psnr(0.0, 1.0) == std::numeric_limits<double>::infinity());
  // Doubling the range adds 20*log10(2).
  CHECK(psnr(0.01, 2.0) ==
        doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("pcc hand values and affine invariance") {
  const la::Vec x = {1, 2, 3, 4, 5};
  la::Vec y = x;
  CHECK(pcc(x, y).value() == doctest::Approx(1.0).epsilon(1e-14));
  for (double& e : y) e = -3.0 * e + 7.0;
  CHECK(pcc(x, y).value() == doctest::Approx(-1.0).epsilon(1e-14));

  Rng rng(8);
  la::Vec a(200), b(200);
  testutil::fill_uniform(a, rng);
  testutil::fill_uniform(b, rng);
  const double base = pcc(a, b).value();
  la::Vec b2 = b;
  for (double& e : b2) e = 2.5 * e - 11.0;
  CHECK(pcc(a, b2).value() == doctest::Approx(base).epsilon(1e-12));

  CHECK(!pcc(la::Vec{1, 1, 1}, la::Vec{1, 2, 3}).has_value());
  CHECK(!pcc(la::Vec{1, 2, 3}, la::Vec{4, 4, 4}).has_value());
}

TEST_CASE("pcc anti-symmetric example") {
  // Exactly anti-correlated pair.
  const la::Vec x = {0, 1, 2, 3};
  const la::Vec y = {3, 2, 1, 0};
  CHECK(pcc(x, y).value() == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("ssim of a signal with itself is 1") {
  Rng rng(21);
  la::Vec x(64);
  testutil::fill_uniform(x, rng);
  CHECK(ssim(x, x, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  la::Mat img = testutil::random_mat(20, 24, rng);
  CHECK(ssim(img, img, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim 1d matches the naive oracle") {
  Rng rng(22);
  const SsimParams p{};
  for (const std::size_t n : {11u, 12u, 40u, 200u}) {
    la::Vec x(n), y(n);
    testutil::fill_uniform(x, rng);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.1 * rng.normal();
    const double got = ssim(x, y, 1.0, p);
    const double want = ssim_oracle_1d(x, y, 1.0, p);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("ssim short-signal fallback uses one uniform window") {
  Rng rng(23);
  la::Vec x(7), y(7);
  testutil::fill_uniform(x, rng);
  testutil::fill_uniform(y, rng);
  const double got = ssim(x, y, 1.0);
  const double want = ssim_oracle_1d(x, y, 1.0, SsimParams{});
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ssim is symmetric and penalises distortion") {
  Rng rng(24);
  la::Vec x(128), y(128);
  testutil::fill_uniform(x, rng);
  for (std::size_t i = 0; i < 128; ++i) y[i] = x[i] + 0.2 * rng.normal();
  const double xy = ssim(x, y, 1.0);
  const double yx = ssim(y, x, 1.0);
  CHECK(xy == doctest::Approx(yx).epsilon(1e-13));
  CHECK(xy < 1.0);
  CHECK(xy > -1.0);

  // More noise scores lower.
  la::Vec z(128);
  Rng rng2(24);
  la::Vec tmp(128);
  testutil::fill_uniform(tmp, rng2);  // replay to reuse the noise stream
  for (std::size_t i = 0; i < 128; ++i) z[i] = x[i] + 0.6 * rng2.normal();
  CHECK(ssim(x, z, 1.0) < xy);
}

TEST_CASE("ssim 2d matches a naive loop oracle") {
  Rng rng(25);
  const SsimParams p{};
  const la::Mat x = testutil::random_mat(14, 17, rng);
  la::Mat y = x;
  for (double& e : y.a) e += 0.1 * rng.normal();

  la::Vec g(p.window);
  const double c = (static_cast<double>(p.window) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.window; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * p.sigma * p.sigma));
    total += g[i];
  }
  for (double& w : g) w /= total;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const std::size_t hpos = x.rows - p.window + 1;
  const std::size_t wpos = x.cols - p.window + 1;
  double acc = 0.0;
  for (std::size_t i0 = 0; i0 < hpos; ++i0) {
    for (std::size_t j0 = 0; j0 < wpos; ++j0) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < p.window; ++i)
        for (std::size_t j = 0; j < p.window; ++j) {
          mx += g[i] * g[j] * x(i0 + i, j0 + j);
          my += g[i] * g[j] * y(i0 + i, j0 + j);
        }
      double vx = 0.0, vy = 0.0, cov = 0.0;
      for (std::size_t i = 0; i < p.window; ++i)
        for (std::size_t j = 0; j < p.window; ++j) {
          const double dx = x(i0 + i, j0 + j) - mx;
          const double dy = y(i0 + i, j0 + j) - my;
          vx += g[i] * g[j] * dx * dx;
          vy += g[i] * g[j] * dy * dy;
          cov += g[i] * g[j] * dx * dy;
        }
      acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  const double want = acc / static_cast<double>(hpos * wpos);
  CHECK(ssim(x, y, 1.0, p) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("ssim 2d rejects images smaller than the window") {
  const la::Mat small(4, 20);
  CHECK_THROWS_AS(ssim(small, small, 1.0), DimensionError);
}

TEST_CASE("compare_signals normalizes by the reference range") {
  const la::Vec truth = {0.0, 5.0, 10.0};
  const la::Vec recon = {0.0, 5.0, 10.0};
  const SignalMetrics m = compare_signals(truth, recon);
  CHECK(m.mse == 0.0);
  CHECK(m.psnr == std::numeric_limits<double>::infinity());
  CHECK(m.pcc.value() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.ssim == doctest::Approx(1.0).epsilon(1e-12));

  // Offset reconstruction: after the shared map, the gap is 1/10 of range.
  const la::Vec off = {1.0, 6.0, 11.0};
  const SignalMetrics m2 = compare_signals(truth, off);
  CHECK(m2.mse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(m2.psnr == doctest::Approx(20.0).epsilon(1e-9));

  // Normalization is anchored to the truth, so scaling both inputs together
  // leaves every metric unchanged.
  la::Vec t3 = truth, o3 = off;
  for (double& e : t3) e *= 3.0;
  for (double& e : o3) e *= 3.0;
  const SignalMetrics m3 = compare_signals(t3, o3);
  CHECK(m3.mse == doctest::Approx(m2.mse).epsilon(1e-12));
  CHECK(m3.ssim == doctest::Approx(m2.ssim).epsilon(1e-12));
}

TEST_CASE("compare_signals with a constant reference stays finite") {
  const la::Vec truth = {2.0, 2.0, 2.0, 2.0};
  const la::Vec recon = {2.0, 2.1, 1.9, 2.0};
  const SignalMetrics m = compare_signals(truth, recon);
  CHECK(std::isfinite(m.mse));
  CHECK(!m.pcc.has_value());
}

TEST_CASE("compare_images runs the 2d pipeline") {
  Rng rng(26);
  const la::Mat truth = testutil::random_mat(16, 16, rng);
  la::Mat recon = truth;
  for (double& e : recon.a) e += 0.05 * rng.normal();
  const SignalMetrics m = compare_images(truth, recon);
  CHECK(m.mse > 0.0);
  CHECK(m.ssim < 1.0);
  CHECK(m.ssim > 0.0);
  const SignalMetrics self = compare_images(truth, truth);
  CHECK(self.ssim == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_SUITE_END();
