#include "cskit/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "cskit/errors.hpp"
#include "cskit/kernels.hpp"

namespace cskit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_common(double eps, std::size_t max_iter) {
  if (eps < 0.0) throw ConfigError("solver: eps must be non-negative");
  if (max_iter == 0) throw ConfigError("solver: max_iter must be >= 1");
}

la::Vec abs_correlations(const la::Mat& a, const la::Vec& r) {
  la::Vec c = la::matvec_t(a, r);
  for (double& e : c) e = std::fabs(e);
  return c;
}

// y - a * (values .* mask)
la::Vec residual_from(const la::Mat& a, const la::Vec& y,
                      const SparseCoefficients& s) {
  la::Vec r = la::matvec(a, masked_values(s));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  return r;
}

void finish(SolveResult& out, const MeasurementSetup& setup,
            Clock::time_point t0) {
  out.x_hat = la::matvec(setup.basis, masked_values(out.s));
  out.wall_time_s = seconds_since(t0);
}

// Tracks ||r|| stagnation: counts consecutive iterations whose relative
// change stays below 1e-7; five in a row means the solver has flatlined.
class StallDetector {
 public:
  bool update(double rn) {
    const double scale = std::max(prev_, 1e-300);
    if (std::fabs(rn - prev_) <= 1e-7 * scale)
      ++count_;
    else
      count_ = 0;
    prev_ = rn;
    return count_ >= 5;
  }

 private:
  double prev_ = -1.0;
  int count_ = 0;
};

}  // namespace

std::vector<std::uint8_t> select_support(const la::Mat& a, const la::Vec& r,
                                         double th) {
  if (!(th > 0.0) || th > 1.0)
    throw ConfigError("select_support: th must be in (0, 1]");
  const la::Vec c = abs_correlations(a, r);
  std::vector<std::uint8_t> mask(a.cols, 0);
  const double cmax = c.empty() ? 0.0 : *std::max_element(c.begin(), c.end());
  if (cmax == 0.0) return mask;
  const double cut = th * cmax;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] >= cut) mask[i] = 1;
  return mask;
}

SparseCoefficients solve_support_ls(const la::Mat& a, const la::Vec& y,
                                    const std::vector<std::uint8_t>& mask) {
  if (mask.size() != a.cols)
    throw DimensionError("solve_support_ls: mask length " +
                         std::to_string(mask.size()) + " vs " +
                         std::to_string(a.cols) + " columns");
  SparseCoefficients out;
  out.values.assign(a.cols, 0.0);
  out.mask = mask;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) idx.push_back(j);
  if (idx.empty()) return out;

  la::Mat sub(a.rows, idx.size());
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t q = 0; q < idx.size(); ++q) sub(i, q) = a(i, idx[q]);
  const la::LstsqResult ls = la::lstsq_minnorm(sub, y);
  for (std::size_t q = 0; q < idx.size(); ++q) out.values[idx[q]] = ls.x[q];
  return out;
}

la::Vec hard_threshold(const la::Vec& s, std::size_t k) {
  la::Vec out(s.size(), 0.0);
  if (k == 0) return out;
  if (k >= s.size()) return s;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Stable sort so equal magnitudes keep index order: lower index survives.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(s[a]) > std::fabs(s[b]);
  });
  for (std::size_t q = 0; q < k; ++q) out[idx[q]] = s[idx[q]];
  return out;
}

SolveResult omp_solve(const MeasurementSetup& setup, const la::Vec& y,
                      const OmpConfig& cfg) {
  if (!(cfg.th > 0.0) || cfg.th > 1.0)
    throw ConfigError("omp: th must be in (0, 1]");
  check_common(cfg.eps, cfg.max_iter);
  if (y.size() != setup.m)
    throw DimensionError("omp: y has " + std::to_string(y.size()) +
                         " entries, setup expects " + std::to_string(setup.m));
  const auto t0 = Clock::now();
  const std::size_t n = setup.n, m = setup.m;

  SolveResult out;
  out.s.values.assign(n, 0.0);
  out.s.mask.assign(n, 0);
  la::Vec r = y;
  std::size_t support = 0;

  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    const double rn = la::norm2(r);
    if (rn < cfg.eps) {
      out.converged = true;
      break;
    }
    if (support >= m) break;  // no residual dimensions left to spend

    const la::Vec c = abs_correlations(setup.a, r);
    const double cmax = *std::max_element(c.begin(), c.end());
    if (cmax == 0.0) break;

    std::vector<std::size_t> fresh;
    const double cut = cfg.th * cmax;
    for (std::size_t j = 0; j < n; ++j)
      if (c[j] >= cut && !out.s.mask[j]) fresh.push_back(j);
    if (fresh.empty()) break;  // selection stuck inside the current support

    // Cap the support at m atoms, keeping the strongest newcomers
    // (ties toward the lower index via stable sort).
    const std::size_t room = m - support;
    if (fresh.size() > room) {
      std::stable_sort(fresh.begin(), fresh.end(),
                       [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });
      fresh.resize(room);
    }
    for (const std::size_t j : fresh) out.s.mask[j] = 1;
    support += fresh.size();

    const SparseCoefficients fit =
        solve_support_ls(setup.a, y, out.s.mask);
    out.s.values = fit.values;
    r = residual_from(setup.a, y, out.s);
    out.iterations = it;
  }

  out.final_residual_norm = la::norm2(r);
  if (out.final_residual_norm < cfg.eps) out.converged = true;
  finish(out, setup, t0);
  return out;
}

namespace {

SolveResult threshold_descent(const MeasurementSetup& setup, const la::Vec& y,
                              double t, double eps, std::size_t max_iter,
                              bool hard, std::size_t k, double lambda) {
  if (!(t > 0.0)) throw ConfigError("solver: t must be positive");
  check_common(eps, max_iter);
  if (y.size() != setup.m)
    throw DimensionError("solver: y has " + std::to_string(y.size()) +
                         " entries, setup expects " + std::to_string(setup.m));
  const auto t0 = Clock::now();
  const std::size_t n = setup.n;

  SolveResult out;
  const double l = la::spectral_norm_sq(setup.a);
  if (l == 0.0) {
    // Zero operator: nothing to invert, the zero vector is as good as any.
    out.s.values.assign(n, 0.0);
    out.s.mask.assign(n, 0);
    out.final_residual_norm = la::norm2(y);
    out.converged = out.final_residual_norm < eps;
    finish(out, setup, t0);
    return out;
  }
  // Hard: plain gradient step t/L on ||y - As||^2 up to the factor 2 kept in
  // the update below. Soft: same step written as 2 * (t / 2L).
  const double step = hard ? t / l : t / (2.0 * l);

  la::Vec s(n, 0.0);
  la::Vec r = y;
  StallDetector stall;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    r = la::matvec(setup.a, s);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
    const double rn = la::norm2(r);
    if (rn < eps) {
      out.converged = true;
      break;
    }
    if (stall.update(rn)) break;

    const la::Vec g = la::matvec_t(setup.a, r);
    if (hard) {
      kern::axpy(step, g.data(), s.data(), n);
      s = hard_threshold(s, k);
    } else {
      kern::axpy(2.0 * step, g.data(), s.data(), n);
      kern::soft_threshold(s.data(), lambda, s.data(), n);
    }
    if (la::norm2_sq(s) > 1e24)
      throw NumericalError("solver diverged (||s|| > 1e12); reduce t");
    out.iterations = it;
  }

  out.s.values = s;
  out.s.mask.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j)
    if (s[j] != 0.0) out.s.mask[j] = 1;
  r = residual_from(setup.a, y, out.s);
  out.final_residual_norm = la::norm2(r);
  if (out.final_residual_norm < eps) out.converged = true;
  finish(out, setup, t0);
  return out;
}

}  // namespace

SolveResult iht_solve(const MeasurementSetup& setup, const la::Vec& y,
                      const IhtConfig& cfg) {
  if (cfg.k == 0 || cfg.k > setup.n)
    throw ConfigError("iht: k must be in [1, n]");
  return threshold_descent(setup, y, cfg.t, cfg.eps, cfg.max_iter,
                           /*hard=*/true, cfg.k, 0.0);
}

SolveResult ista_solve(const MeasurementSetup& setup, const la::Vec& y,
                       const IstaConfig& cfg) {
  if (cfg.lambda < 0.0) throw ConfigError("ista: lambda must be non-negative");
  return threshold_descent(setup, y, cfg.t, cfg.eps, cfg.max_iter,
                           /*hard=*/false, 0, cfg.lambda);
}

}  // namespace cskit
