#include "cskit/clomp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "cskit/errors.hpp"
#include "cskit/kernels.hpp"

namespace cskit {

namespace {

using Clock = std::chrono::steady_clock;

void validate(const ClompConfig& cfg) {
  if (!(cfg.th > 0.0) || cfg.th > 1.0)
    throw ConfigError("clomp: th must be in (0, 1]");
  if (cfg.max_outer == 0) throw ConfigError("clomp: max_outer must be >= 1");
  if (cfg.eps < 0.0) throw ConfigError("clomp: eps must be non-negative");
  if (cfg.inner_steps == 0)
    throw ConfigError("clomp: inner_steps must be >= 1");
  if (!(cfg.lr > 0.0)) throw ConfigError("clomp: lr must be positive");
  if (cfg.stall_tol < 0.0)
    throw ConfigError("clomp: stall_tol must be non-negative");
  if (cfg.stall_patience == 0)
    throw ConfigError("clomp: stall_patience must be >= 1");
}

la::Mat masked(const la::Mat& s, const std::vector<std::uint8_t>& mask) {
  la::Mat out = s;
  for (std::size_t i = 0; i < out.a.size(); ++i)
    if (!mask[i]) out.a[i] = 0.0;
  return out;
}

// mask |= thresholded per-column scores. scores holds a^T R, one column per
// signal; a zero column leaves its mask untouched.
void inject_from_scores(const la::Mat& scores, double th,
                        std::vector<std::uint8_t>& mask) {
  const std::size_t n = scores.rows, batch = scores.cols;
  for (std::size_t j = 0; j < batch; ++j) {
    double cmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      cmax = std::max(cmax, std::fabs(scores(i, j)));
    if (cmax == 0.0) continue;
    const double cut = th * cmax;
    for (std::size_t i = 0; i < n; ++i)
      if (std::fabs(scores(i, j)) >= cut) mask[i * batch + j] = 1;
  }
}

// Transposes of the operators, built once per solve; the basis transpose is
// only needed when a prior chains through the synthesis step.
struct LossOps {
  const MeasurementSetup& setup;
  la::Mat at;
  la::Mat dt;

  LossOps(const MeasurementSetup& s, bool need_dt)
      : setup(s), at(la::transpose(s.a)) {
    if (need_dt) dt = la::transpose(s.basis);
  }
};

la::Mat subtract(const la::Mat& a, const la::Mat& b) {
  la::Mat out = a;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] -= b.a[i];
  return out;
}

LossBreakdown loss_impl(LossOps& ops, const la::Mat& y_cols,
                        const ClompState& state, const ClompConfig& cfg,
                        double w_tv, double w_lv, la::Mat* grad) {
  const std::size_t n = ops.setup.n;
  const std::size_t batch = y_cols.cols;
  LossBreakdown lb;
  lb.w_tv = w_tv;
  lb.w_lv = w_lv;

  const la::Mat s_eff = masked(state.s, state.mask);
  const la::Mat r = subtract(la::matmul(ops.setup.a, s_eff), y_cols);
  lb.residual = kern::sum_sq(r.data(), r.a.size());

  la::Mat g;
  if (grad) {
    g = la::matmul(ops.at, r);
    for (double& e : g.a) e *= 2.0;
  }

  const bool lv_fits = batch >= cfg.lv.window && n >= cfg.lv.window;
  if (w_tv > 0.0 || (w_lv > 0.0 && lv_fits)) {
    const la::Mat x = la::matmul(ops.setup.basis, s_eff);
    la::Mat gx(n, batch);
    if (w_tv > 0.0) {
      if (batch == 1) {
        la::Vec gv;
        lb.tv = tv_1d(x.a, grad ? &gv : nullptr);
        if (grad)
          for (std::size_t i = 0; i < n; ++i) gx.a[i] += w_tv * gv[i];
      } else {
        la::Mat gtv;
        lb.tv = tv_2d(x, grad ? &gtv : nullptr);
        if (grad) kern::axpy(w_tv, gtv.data(), gx.data(), gx.a.size());
      }
    }
    if (w_lv > 0.0 && lv_fits) {
      la::Mat glv;
      lb.lv = local_variance(x, cfg.lv, grad ? &glv : nullptr);
      if (grad) kern::axpy(w_lv, glv.data(), gx.data(), gx.a.size());
    }
    if (grad) {
      const la::Mat chain = la::matmul(ops.dt, gx);
      for (std::size_t i = 0; i < g.a.size(); ++i) g.a[i] += chain.a[i];
    }
  }

  if (grad) {
    for (std::size_t i = 0; i < g.a.size(); ++i)
      if (!state.mask[i]) g.a[i] = 0.0;
    *grad = std::move(g);
  }
  lb.total = lb.residual + w_tv * lb.tv + w_lv * lb.lv;
  return lb;
}

}  // namespace

std::pair<double, double> resolve_weights(const ClompConfig& cfg,
                                          const la::Mat& y_cols) {
  if (y_cols.empty()) throw DimensionError("resolve_weights: empty batch");
  const double mean_sq =
      kern::sum_sq(y_cols.data(), y_cols.a.size()) /
      static_cast<double>(y_cols.a.size());
  const double auto_w = 0.01 * mean_sq;
  return {cfg.w_tv < 0.0 ? auto_w : cfg.w_tv,
          cfg.w_lv < 0.0 ? auto_w : cfg.w_lv};
}

void inject_support(const MeasurementSetup& setup, const la::Mat& r_cols,
                    double th, std::vector<std::uint8_t>& mask) {
  if (!(th > 0.0) || th > 1.0)
    throw ConfigError("inject_support: th must be in (0, 1]");
  if (r_cols.rows != setup.m)
    throw DimensionError("inject_support: residual rows " +
                         std::to_string(r_cols.rows) + " vs m=" +
                         std::to_string(setup.m));
  if (mask.size() != setup.n * r_cols.cols)
    throw DimensionError("inject_support: mask size mismatch");
  const la::Mat scores = la::matmul(la::transpose(setup.a), r_cols);
  inject_from_scores(scores, th, mask);
}

LossBreakdown clomp_loss(const MeasurementSetup& setup, const la::Mat& y_cols,
                         const ClompState& state, const ClompConfig& cfg,
                         la::Mat* grad) {
  validate(cfg);
  if (y_cols.rows != setup.m)
    throw DimensionError("clomp_loss: y rows " + std::to_string(y_cols.rows) +
                         " vs m=" + std::to_string(setup.m));
  if (state.s.rows != setup.n || state.s.cols != y_cols.cols ||
      state.mask.size() != state.s.a.size())
    throw DimensionError("clomp_loss: state shape mismatch");
  const auto [w_tv, w_lv] = resolve_weights(cfg, y_cols);
  LossOps ops(setup, w_tv > 0.0 || w_lv > 0.0);
  return loss_impl(ops, y_cols, state, cfg, w_tv, w_lv, grad);
}

void gradient_step(ClompState& state, const la::Mat& grad,
                   const ClompConfig& cfg) {
  if (grad.rows != state.s.rows || grad.cols != state.s.cols)
    throw DimensionError("gradient_step: gradient shape mismatch");
  if (!(cfg.lr > 0.0)) throw ConfigError("gradient_step: lr must be positive");
  const std::size_t total = state.s.a.size();
  switch (cfg.opt) {
    case Optimizer::plain:
      for (std::size_t i = 0; i < total; ++i)
        if (state.mask[i]) state.s.a[i] -= cfg.lr * grad.a[i];
      break;
    case Optimizer::momentum:
      // Heavy-ball accumulator: v <- 0.9 v + g, s <- s - lr v.
      for (std::size_t i = 0; i < total; ++i) {
        state.m1.a[i] = 0.9 * state.m1.a[i] + grad.a[i];
        if (state.mask[i]) state.s.a[i] -= cfg.lr * state.m1.a[i];
      }
      break;
    case Optimizer::adam: {
      constexpr double b1 = 0.9, b2 = 0.999, tiny = 1e-8;
      ++state.adam_steps;
      const double bc1 =
          1.0 - std::pow(b1, static_cast<double>(state.adam_steps));
      const double bc2 =
          1.0 - std::pow(b2, static_cast<double>(state.adam_steps));
      for (std::size_t i = 0; i < total; ++i) {
        const double g = grad.a[i];
        state.m1.a[i] = b1 * state.m1.a[i] + (1.0 - b1) * g;
        state.m2.a[i] = b2 * state.m2.a[i] + (1.0 - b2) * g * g;
        if (state.mask[i]) {
          const double mhat = state.m1.a[i] / bc1;
          const double vhat = state.m2.a[i] / bc2;
          state.s.a[i] -= cfg.lr * mhat / (std::sqrt(vhat) + tiny);
        }
      }
      break;
    }
  }
}

BatchSolveResult clomp_solve_batch(const MeasurementSetup& setup,
                                   const la::Mat& y_cols,
                                   const ClompConfig& cfg) {
  validate(cfg);
  if (y_cols.rows != setup.m)
    throw DimensionError("clomp: y rows " + std::to_string(y_cols.rows) +
                         " vs m=" + std::to_string(setup.m));
  if (y_cols.cols == 0) throw DimensionError("clomp: empty batch");
  const auto t0 = Clock::now();
  const std::size_t n = setup.n;
  const std::size_t batch = y_cols.cols;

  const auto [w_tv, w_lv] = resolve_weights(cfg, y_cols);
  LossOps ops(setup, w_tv > 0.0 || w_lv > 0.0);

  ClompState state(n, batch);
  la::Mat best_s;
  std::vector<std::uint8_t> best_mask;
  double best_loss = std::numeric_limits<double>::infinity();
  double prev_loss = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  bool converged = false;
  std::size_t iterations = 0;

  for (std::size_t outer = 1; outer <= cfg.max_outer; ++outer) {
    const la::Mat s_eff = masked(state.s, state.mask);
    const la::Mat r = subtract(la::matmul(setup.a, s_eff), y_cols);
    const double rn = std::sqrt(kern::sum_sq(r.data(), r.a.size()));
    if (rn < cfg.eps) {
      converged = true;
      break;
    }

    const std::vector<std::uint8_t> prev_mask = state.mask;
    inject_from_scores(la::matmul(ops.at, r), cfg.th, state.mask);
    const bool mask_changed = state.mask != prev_mask;

    la::Mat grad;
    for (std::size_t step = 0; step < cfg.inner_steps; ++step) {
      loss_impl(ops, y_cols, state, cfg, w_tv, w_lv, &grad);
      gradient_step(state, grad, cfg);
    }
    const LossBreakdown lb =
        loss_impl(ops, y_cols, state, cfg, w_tv, w_lv, nullptr);
    if (!std::isfinite(lb.total))
      throw NumericalError("clomp: loss diverged; reduce lr");
    iterations = outer;

    if (lb.total < best_loss) {
      best_loss = lb.total;
      best_s = state.s;
      best_mask = state.mask;
    }
    const double rel = std::isfinite(prev_loss)
                           ? (prev_loss - lb.total) /
                                 std::max(std::fabs(prev_loss), 1e-300)
                           : std::numeric_limits<double>::infinity();
    if (!mask_changed && rel < cfg.stall_tol)
      ++stall;
    else
      stall = 0;
    prev_loss = lb.total;
    if (stall >= cfg.stall_patience) break;
  }

  BatchSolveResult out;
  out.iterations = iterations;
  if (!converged && std::isfinite(best_loss)) {
    out.s = std::move(best_s);
    out.mask = std::move(best_mask);
  } else {
    out.s = state.s;
    out.mask = state.mask;
  }
  const la::Mat s_eff = masked(out.s, out.mask);
  const la::Mat r = subtract(la::matmul(setup.a, s_eff), y_cols);
  out.final_residual_norm = std::sqrt(kern::sum_sq(r.data(), r.a.size()));
  out.converged = out.final_residual_norm < cfg.eps;
  out.x_hat = la::matmul(setup.basis, s_eff);
  out.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

SolveResult clomp_solve(const MeasurementSetup& setup, const la::Vec& y,
                        const ClompConfig& cfg) {
  la::Mat y_cols(setup.m, 1);
  if (y.size() != setup.m)
    throw DimensionError("clomp: y has " + std::to_string(y.size()) +
                         " entries, setup expects " + std::to_string(setup.m));
  y_cols.a = y;
  const BatchSolveResult batch = clomp_solve_batch(setup, y_cols, cfg);
  SolveResult out;
  out.s.values = batch.s.a;
  out.s.mask = batch.mask;
  out.x_hat = batch.x_hat.a;
  out.iterations = batch.iterations;
  out.final_residual_norm = batch.final_residual_norm;
  out.converged = batch.converged;
  out.wall_time_s = batch.wall_time_s;
  return out;
}

}  // namespace cskit
