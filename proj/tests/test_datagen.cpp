#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cskit/datagen.hpp"
#include "cskit/errors.hpp"
#include "cskit/priors.hpp"
#include "cskit/sensing.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace cskit;

namespace {

std::vector<std::size_t> support_positions(const SparseCoefficients& s) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < s.mask.size(); ++i)
    if (s.mask[i]) pos.push_back(i);
  return pos;
}

}  // namespace

TEST_SUITE_BEGIN("datagen");

TEST_CASE("generate_signal places exactly round(kr*n) coefficients") {
  const SparseBasis basis = dct_basis(200);
  for (const double kr : {0.05, 0.1, 0.33, 1.0}) {
    SignalSpec spec;
    spec.n = 200;
    spec.kr = kr;
    spec.seed = 3;
    const GeneratedSignal g = generate_signal(spec, basis);
    const auto want = static_cast<std::size_t>(std::llround(kr * 200.0));
    CHECK(g.k == want);
    std::size_t nz = 0, marked = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      if (g.truth.values[i] != 0.0) ++nz;
      if (g.truth.mask[i]) ++marked;
      if (g.truth.values[i] != 0.0) CHECK(g.truth.mask[i] == 1);
    }
    CHECK(nz == want);
    CHECK(marked == want);
  }
}

TEST_CASE("a one-atom signal carries the profile's first magnitude") {
  const SparseBasis basis = dct_basis(50);
  SignalSpec spec;
  spec.n = 50;
  spec.kr = 0.02;  // round(1.0) = 1 atom
  spec.noise_level = 0.0;
  const GeneratedSignal g = generate_signal(spec, basis);
  CHECK(g.k == 1);
  const auto pos = support_positions(g.truth);
  REQUIRE(pos.size() == 1);
  // Rank 0 of the bump: exp(-(0 - 1/8)^2 / (2 (1/4)^2)) = exp(-1/8).
  CHECK(std::fabs(g.truth.values[pos[0]]) ==
        doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
}

TEST_CASE("magnitudes along the sorted support trace one bump") {
  const SparseBasis basis = dct_basis(1000);
  for (const std::uint64_t seed : {1u, 9u, 42u}) {
    SignalSpec spec;
    spec.n = 1000;
    spec.kr = 0.3;
    spec.seed = seed;
    const GeneratedSignal g = generate_signal(spec, basis);
    const auto pos = support_positions(g.truth);
    REQUIRE(pos.size() == 300);
    la::Vec seq(300);
    for (std::size_t j = 0; j < 300; ++j)
      seq[j] = std::fabs(g.truth.values[pos[j]]);
    const std::size_t peak = static_cast<std::size_t>(
        std::max_element(seq.begin(), seq.end()) - seq.begin());
    for (std::size_t j = 0; j + 1 <= peak; ++j) CHECK(seq[j] <= seq[j + 1]);
    for (std::size_t j = peak; j + 1 < 300; ++j) CHECK(seq[j] >= seq[j + 1]);
    CHECK(seq[peak] == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("the strongest tenth of the atoms sits in the low frequencies") {
  const SparseBasis basis = dct_basis(1000);
  for (const std::uint64_t seed : {2u, 17u, 99u}) {
    SignalSpec spec;
    spec.n = 1000;
    spec.kr = 0.3;
    spec.seed = seed;
    const GeneratedSignal g = generate_signal(spec, basis);
    std::vector<std::pair<double, std::size_t>> by_mag;
    for (const std::size_t p : support_positions(g.truth))
      by_mag.emplace_back(std::fabs(g.truth.values[p]), p);
    std::stable_sort(by_mag.begin(), by_mag.end(),
                     [](const auto& a, const auto& b) {
                       return a.first > b.first;
                     });
    for (std::size_t q = 0; q < 30; ++q)  // 10% of 300 atoms
      CHECK(by_mag[q].second < 150);      // 15% of the band
  }
}

TEST_CASE("coefficient noise hits only the upper half of the spectrum") {
  const SparseBasis basis = dct_basis(128);
  SignalSpec spec;
  spec.n = 128;
  spec.kr = 0.2;
  spec.noise_level = 0.01;
  spec.seed = 5;
  const GeneratedSignal g = generate_signal(spec, basis);
  const la::Vec analysis = la::matvec_t(basis.d, g.x);
  const la::Vec clean = masked_values(g.truth);
  double upper = 0.0;
  for (std::size_t i = 0; i < 128; ++i) {
    const double d = analysis[i] - clean[i];
    if (i < 64)
      CHECK(std::fabs(d) < 1e-12);
    else
      upper += d * d;
  }
  CHECK(upper > 0.0);

  SignalSpec quiet = spec;
  quiet.noise_level = 0.0;
  const GeneratedSignal gq = generate_signal(quiet, basis);
  const la::Vec aq = la::matvec_t(basis.d, gq.x);
  const la::Vec cq = masked_values(gq.truth);
  for (std::size_t i = 0; i < 128; ++i)
    CHECK(std::fabs(aq[i] - cq[i]) < 1e-12);
}

TEST_CASE("generation is a pure function of the seed") {
  const SparseBasis basis = dct_basis(64);
  SignalSpec spec;
  spec.n = 64;
  spec.kr = 0.25;
  spec.seed = 12;
  const GeneratedSignal a = generate_signal(spec, basis);
  const GeneratedSignal b = generate_signal(spec, basis);
  CHECK(a.x == b.x);
  CHECK(a.truth.values == b.truth.values);
  spec.seed = 13;
  const GeneratedSignal c = generate_signal(spec, basis);
  CHECK(a.x != c.x);
}

TEST_CASE("batch columns reuse the per-signal generator with shifted seeds") {
  const SparseBasis basis = dct_basis(48);
  SignalSpec spec;
  spec.n = 48;
  spec.kr = 0.2;
  spec.seed = 30;
  la::Mat truth;
  const la::Mat x = generate_signal_batch(spec, basis, 3, &truth);
  CHECK(x.rows == 48);
  CHECK(x.cols == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    SignalSpec one = spec;
    one.seed = 30 + j;
    const GeneratedSignal g = generate_signal(one, basis);
    CHECK(la::get_col(x, j) == g.x);
    CHECK(la::get_col(truth, j) == masked_values(g.truth));
  }
}

TEST_CASE("generated signals land near the requested sparse rate") {
  const SparseBasis basis = dct_basis(1000);
  SignalSpec spec;
  spec.n = 1000;
  spec.kr = 0.2;
  for (const std::uint64_t seed : {0u, 1u, 2u}) {
    spec.seed = seed;
    const GeneratedSignal g = generate_signal(spec, basis);
    CHECK(std::fabs(sparse_rate(g.x, basis) - 0.2) <= 0.1);
  }
}

TEST_CASE("generate_signal validates its inputs") {
  const SparseBasis basis = dct_basis(10);
  SignalSpec spec;
  spec.n = 10;
  spec.kr = 0.0;
  CHECK_THROWS_AS(generate_signal(spec, basis), ConfigError);
  spec.kr = 0.01;  // rounds to zero atoms
  CHECK_THROWS_AS(generate_signal(spec, basis), ConfigError);
  spec.kr = 0.5;
  spec.noise_level = -1.0;
  CHECK_THROWS_AS(generate_signal(spec, basis), ConfigError);
  spec.noise_level = 0.0;
  spec.n = 12;
  CHECK_THROWS_AS(generate_signal(spec, basis), DimensionError);
}

TEST_CASE("resize_area averages whole blocks") {
  la::Mat src(4, 2);
  src.a = {1, 2, 3, 4, 5, 6, 7, 8};
  const la::Mat out = resize_area(src, 2, 1);
  CHECK(out.rows == 2);
  CHECK(out.cols == 1);
  CHECK(out(0, 0) == doctest::Approx((1 + 2 + 3 + 4) / 4.0).epsilon(1e-14));
  CHECK(out(1, 0) == doctest::Approx((5 + 6 + 7 + 8) / 4.0).epsilon(1e-14));
}

TEST_CASE("resize_area handles fractional pixel coverage") {
  la::Mat src(3, 3);
  for (std::size_t i = 0; i < 9; ++i) src.a[i] = static_cast<double>(i);
  const la::Mat out = resize_area(src, 2, 2);
  // Top-left output covers rows [0,1.5) x cols [0,1.5):
  // (1*0 + 0.5*1 + 0.5*3 + 0.25*4) / 2.25
  CHECK(out(0, 0) == doctest::Approx(3.0 / 2.25).epsilon(1e-13));

  // Convexity: outputs stay inside the source range.
  Rng rng(71);
  const la::Mat noisy = testutil::random_mat(13, 9, rng);
  const la::Mat small = resize_area(noisy, 5, 4);
  const auto [mn, mx] =
      std::minmax_element(noisy.a.begin(), noisy.a.end());
  for (const double v : small.a) {
    CHECK(v >= *mn - 1e-12);
    CHECK(v <= *mx + 1e-12);
  }

  CHECK_THROWS_AS(resize_area(src, 5, 2), ConfigError);
  CHECK_THROWS_AS(resize_area(src, 0, 2), ConfigError);
}

TEST_CASE("gaussian_blur basics") {
  Rng rng(72);
  const la::Mat img = testutil::random_mat(12, 10, rng);
  const la::Mat same = gaussian_blur(img, 0.0);
  CHECK(same.a == img.a);

  la::Mat flat(6, 6);
  for (double& e : flat.a) e = 0.4;
  const la::Mat still_flat = gaussian_blur(flat, 2.0);
  for (const double v : still_flat.a)
    CHECK(v == doctest::Approx(0.4).epsilon(1e-12));

  // Smoothing strictly reduces the neighbour differences of a noise image.
  const la::Mat soft = gaussian_blur(img, 1.5);
  CHECK(tv_2d(soft) < tv_2d(img));
}

TEST_CASE("column_mean_sparse_rate of a constant image") {
  la::Mat img(8, 5);
  for (double& e : img.a) e = 0.3;
  // Every column compresses to the single constant atom: rate 1/8.
  CHECK(column_mean_sparse_rate(img, dct_basis(8)) ==
        doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("noise_image is seeded and bounded") {
  const la::Mat a = noise_image(16, 12, 7);
  const la::Mat b = noise_image(16, 12, 7);
  const la::Mat c = noise_image(16, 12, 8);
  CHECK(a.a == b.a);
  CHECK(a.a != c.a);
  for (const double v : a.a) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("prepare_image reaches a reachable sparse rate target") {
  const la::Mat source = noise_image(128, 96, 19);
  ImagePrepSpec spec;
  spec.height = 64;
  spec.width = 64;
  spec.target_kr = 0.2;
  const PreparedImage prep = prepare_image(source, spec);
  CHECK(prep.img.rows == 64);
  CHECK(prep.img.cols == 64);
  CHECK(prep.within_tol);
  CHECK(std::fabs(prep.achieved_kr - 0.2) <= spec.kr_tol);
  CHECK(prep.sigma > 0.0);
  CHECK(prep.achieved_kr ==
        doctest::Approx(column_mean_sparse_rate(prep.img, dct_basis(64)))
            .epsilon(1e-9));
  for (const double v : prep.img.a) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("prepare_image reports unreachable targets honestly") {
  const la::Mat source = noise_image(80, 80, 23);
  ImagePrepSpec spec;
  spec.height = 48;
  spec.width = 48;
  spec.target_kr = 1.0;  // blur can only lower the rate
  const PreparedImage prep = prepare_image(source, spec);
  CHECK(!prep.within_tol);
  CHECK(prep.sigma == 0.0);
  CHECK(prep.achieved_kr < 1.0);
}

TEST_CASE("prepare_image validates its inputs") {
  const la::Mat source = noise_image(32, 32, 1);
  ImagePrepSpec spec;
  spec.height = 64;
  spec.width = 32;
  spec.target_kr = 0.5;
  CHECK_THROWS_AS(prepare_image(source, spec), ConfigError);
  spec.height = 0;
  CHECK_THROWS_AS(prepare_image(source, spec), ConfigError);
  spec.height = 16;
  spec.width = 16;
  spec.target_kr = 0.0;
  CHECK_THROWS_AS(prepare_image(source, spec), ConfigError);
}

TEST_SUITE_END();
