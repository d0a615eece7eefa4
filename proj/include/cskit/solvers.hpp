#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cskit/linalg.hpp"
#include "cskit/sensing.hpp"

namespace cskit {

struct SolveResult {
  SparseCoefficients s;
  la::Vec x_hat;  // basis * (values .* mask)
  std::size_t iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;  // residual dropped below eps
  double wall_time_s = 0.0;
};

// Correlation-threshold support pick: mark every index whose |a_j^T r|,
// normalized by the largest such value, reaches th. The argmax is always
// marked; a zero residual marks nothing.
std::vector<std::uint8_t> select_support(const la::Mat& a, const la::Vec& r,
                                         double th);

// Least squares restricted to the masked columns; coefficients outside the
// mask are zero. Rank-deficient supports get the minimum-norm solution.
SparseCoefficients solve_support_ls(const la::Mat& a, const la::Vec& y,
                                    const std::vector<std::uint8_t>& mask);

// Keep the k largest-magnitude entries, zero the rest. Ties are broken
// toward the lower index.
la::Vec hard_threshold(const la::Vec& s, std::size_t k);

struct OmpConfig {
  double th = 0.7;            // correlation threshold, fraction of the max
  std::size_t max_iter = 200;
  double eps = 1e-6;          // stop when ||residual|| falls below this
};

struct IhtConfig {
  std::size_t k = 0;          // sparsity to enforce, required
  double t = 1.0;             // step scale; effective step is t / sigma_max^2
  std::size_t max_iter = 200;
  double eps = 1e-6;
};

struct IstaConfig {
  double lambda = 0.01;       // soft-threshold level
  double t = 1.0;             // step scale, as for IHT
  std::size_t max_iter = 200;
  double eps = 1e-6;
};

// Greedy pursuit with multi-atom selection: each iteration ORs the
// thresholded correlation picks into the mask (capped at m atoms, strongest
// first) and refits by least squares on the grown support.
SolveResult omp_solve(const MeasurementSetup& setup, const la::Vec& y,
                      const OmpConfig& cfg = {});

// Iterative hard thresholding. The update is
//   s <- keep_k(s + step * a^T (y - a s)),    step = t / sigma_max^2(a),
// so t = 1 is the largest scale-free step that is stable for the gradient
// descent part. Norm blowup past 1e12 aborts with NumericalError.
SolveResult iht_solve(const MeasurementSetup& setup, const la::Vec& y,
                      const IhtConfig& cfg);

// Iterative soft thresholding:
//   s <- soft_lambda(s - 2 * step * a^T (a s - y)),  step = t / (2 sigma_max^2),
// which at t = 1 is the classical 1/L gradient step for ||a s - y||^2.
SolveResult ista_solve(const MeasurementSetup& setup, const la::Vec& y,
                       const IstaConfig& cfg = {});

}  // namespace cskit
