#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cskit/linalg.hpp"
#include "cskit/priors.hpp"
#include "cskit/sensing.hpp"
#include "cskit/solvers.hpp"

namespace cskit {

enum class Optimizer { plain, momentum, adam };

struct ClompConfig {
  double th = 0.7;            // support injection threshold
  std::size_t max_outer = 200;
  double eps = 1e-6;          // stop when the residual Frobenius norm drops below
  std::size_t inner_steps = 50;
  double lr = 0.01;
  Optimizer opt = Optimizer::adam;
  // Prior weights. Negative means auto: 0.01 * (||y||^2 / measurement count),
  // i.e. scaled to the mean squared measurement. Zero disables the prior.
  double w_tv = -1.0;
  double w_lv = -1.0;
  LvParams lv;
  // Extra stop: once the mask stops growing, quit after `stall_patience`
  // consecutive outer iterations whose relative total-loss improvement is
  // below `stall_tol`.
  double stall_tol = 1e-4;
  std::size_t stall_patience = 2;
};

struct LossBreakdown {
  double residual = 0.0;  // sum of squared residual entries, all columns
  double tv = 0.0;
  double lv = 0.0;
  double w_tv = 0.0;      // resolved weights actually applied
  double w_lv = 0.0;
  double total = 0.0;     // residual + w_tv * tv + w_lv * lv
};

// Coefficients being learned for a batch of signals, one column each.
// mask has the same row-major layout as s; moments back the optimizer.
struct ClompState {
  la::Mat s;
  std::vector<std::uint8_t> mask;
  la::Mat m1, m2;
  std::size_t adam_steps = 0;

  ClompState() = default;
  ClompState(std::size_t n, std::size_t batch)
      : s(n, batch), mask(n * batch, 0), m1(n, batch), m2(n, batch) {}
};

// Resolved (w_tv, w_lv) for this measurement batch, applying the auto rule
// for negative config values.
std::pair<double, double> resolve_weights(const ClompConfig& cfg,
                                          const la::Mat& y_cols);

// OR per-column correlation picks of the residual into the mask. Equivalent
// to select_support() column by column; columns with zero residual add
// nothing. The mask only ever grows.
void inject_support(const MeasurementSetup& setup, const la::Mat& r_cols,
                    double th, std::vector<std::uint8_t>& mask);

// Total loss of the current iterate and, when grad is non-null, its
// derivative w.r.t. s. Both the residual term and the prior chain are masked,
// so frozen-out coefficients always see zero gradient. Priors act on the
// synthesized matrix D * (s .* mask): TV over the single column when the
// batch has one signal, 2-d TV plus local variance over the column stack
// otherwise (local variance only when both dims fit its window).
LossBreakdown clomp_loss(const MeasurementSetup& setup, const la::Mat& y_cols,
                         const ClompState& state, const ClompConfig& cfg,
                         la::Mat* grad);

// One optimizer update of state.s from the masked gradient.
void gradient_step(ClompState& state, const la::Mat& grad,
                   const ClompConfig& cfg);

struct BatchSolveResult {
  la::Mat s;                       // n x batch learned coefficients
  std::vector<std::uint8_t> mask;  // support actually used
  la::Mat x_hat;                   // basis * (s .* mask)
  std::size_t iterations = 0;      // outer iterations run
  double final_residual_norm = 0.0;
  bool converged = false;
  double wall_time_s = 0.0;
};

// Full reconstruction loop: grow support from the residual, then learn the
// masked coefficients by inner_steps optimizer updates, repeat. On
// non-convergence the best-total-loss outer iterate is returned.
BatchSolveResult clomp_solve_batch(const MeasurementSetup& setup,
                                   const la::Mat& y_cols,
                                   const ClompConfig& cfg = {});

// Single-signal wrapper: exactly clomp_solve_batch on a one-column batch.
SolveResult clomp_solve(const MeasurementSetup& setup, const la::Vec& y,
                        const ClompConfig& cfg = {});

}  // namespace cskit
