#include "cskit/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cskit/errors.hpp"
#include "cskit/kernels.hpp"

namespace cskit {

SparseBasis dct_basis(std::size_t n) {
  if (n == 0) throw ConfigError("dct_basis: n must be positive");
  SparseBasis b;
  b.n = n;
  b.d = la::Mat(n, n);
  const double c0 = std::sqrt(1.0 / static_cast<double>(n));
  const double ck = std::sqrt(2.0 / static_cast<double>(n));
  const double base = std::numbers::pi / (2.0 * static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double row_phase = static_cast<double>(2 * j + 1) * base;
    for (std::size_t k = 0; k < n; ++k) {
      const double scale = k == 0 ? c0 : ck;
      b.d(j, k) = scale * std::cos(row_phase * static_cast<double>(k));
    }
  }
  return b;
}

SparseBasis identity_basis(std::size_t n) {
  if (n == 0) throw ConfigError("identity_basis: n must be positive");
  return SparseBasis{n, la::identity(n)};
}

SensingMatrix gaussian_sensing_matrix(std::size_t n, double sr,
                                      std::uint64_t seed) {
  if (n == 0) throw ConfigError("sensing matrix: n must be positive");
  if (!(sr > 0.0) || sr > 1.0)
    throw ConfigError("sensing matrix: sr must be in (0, 1], got " +
                      std::to_string(sr));
  // The tiny offset keeps decimal rates honest: 1000 * 0.29 sits just below
  // 290 in binary and must not floor to 289.
  const auto m = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * sr + 1e-9));
  if (m == 0)
    throw ConfigError("sensing matrix: floor(n * sr) is zero, raise sr");
  SensingMatrix s;
  s.m = m;
  s.n = n;
  s.sr = sr;
  s.seed = seed;
  s.mat = la::Mat(m, n);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& e : s.mat.a) e = scale * rng.normal();
  return s;
}

MeasurementSetup compose_setup(const SensingMatrix& sensing,
                               const SparseBasis& basis) {
  if (sensing.n != basis.n)
    throw DimensionError("compose_setup: sensing n=" +
                         std::to_string(sensing.n) + " vs basis n=" +
                         std::to_string(basis.n));
  MeasurementSetup setup;
  setup.n = sensing.n;
  setup.m = sensing.m;
  setup.sr = sensing.sr;
  setup.seed = sensing.seed;
  setup.sensing = sensing.mat;
  setup.basis = basis.d;
  setup.a = la::matmul(sensing.mat, basis.d);
  return setup;
}

MeasurementSetup make_setup(std::size_t n, double sr, std::uint64_t seed) {
  return compose_setup(gaussian_sensing_matrix(n, sr, seed), dct_basis(n));
}

Measurement measure(const MeasurementSetup& setup, const la::Vec& x,
                    double noise_level, Rng& rng) {
  if (x.size() != setup.n)
    throw DimensionError("measure: x has " + std::to_string(x.size()) +
                         " entries, setup expects " + std::to_string(setup.n));
  if (noise_level < 0.0)
    throw ConfigError("measure: noise_level must be non-negative");
  Measurement out;
  out.noise_level = noise_level;
  out.y = la::matvec(setup.sensing, x);
  if (noise_level > 0.0)
    for (double& e : out.y) e += noise_level * rng.normal();
  return out;
}

MeasurementBatch measure_batch(const MeasurementSetup& setup,
                               const la::Mat& x_cols, double noise_level,
                               Rng& rng) {
  if (x_cols.rows != setup.n)
    throw DimensionError("measure_batch: signals have " +
                         std::to_string(x_cols.rows) + " rows, setup expects " +
                         std::to_string(setup.n));
  MeasurementBatch out;
  out.noise_level = noise_level;
  out.y = la::Mat(setup.m, x_cols.cols);
  for (std::size_t j = 0; j < x_cols.cols; ++j) {
    const Measurement one =
        measure(setup, la::get_col(x_cols, j), noise_level, rng);
    la::set_col(out.y, j, one.y);
  }
  return out;
}

la::Vec masked_values(const SparseCoefficients& s) {
  if (s.values.size() != s.mask.size())
    throw DimensionError("coefficients: values/mask length mismatch");
  la::Vec v(s.values.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = s.mask[i] ? s.values[i] : 0.0;
  return v;
}

la::Vec residual(const MeasurementSetup& setup, const SparseCoefficients& s,
                 const la::Vec& y) {
  if (y.size() != setup.m)
    throw DimensionError("residual: y has " + std::to_string(y.size()) +
                         " entries, setup expects " + std::to_string(setup.m));
  la::Vec r = la::matvec(setup.a, masked_values(s));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  return r;
}

double sparse_rate(const la::Vec& x, const SparseBasis& basis,
                   double energy_fraction) {
  if (x.size() != basis.n)
    throw DimensionError("sparse_rate: x has " + std::to_string(x.size()) +
                         " entries, basis expects " + std::to_string(basis.n));
  if (!(energy_fraction > 0.0) || energy_fraction > 1.0)
    throw ConfigError("sparse_rate: energy fraction must be in (0, 1]");
  la::Vec s = la::matvec_t(basis.d, x);
  for (double& e : s) e = std::fabs(e);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double total = 0.0;
  for (double e : s) total += e;
  if (total == 0.0) return 0.0;
  // Tiny relative slack so exact-tie designs do not flip on rounding.
  const double target = energy_fraction * total * (1.0 - 1e-12);
  double cum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    if (cum >= target)
      return static_cast<double>(i + 1) / static_cast<double>(basis.n);
  }
  return 1.0;
}

}  // namespace cskit
