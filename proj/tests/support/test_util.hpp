#pragma once

// Shared helpers for the test binaries. The *oracle* functions intentionally
// reimplement the math with different loop structures and accumulation order
// than the library so the two sides are independent.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "cskit/linalg.hpp"
#include "cskit/rng.hpp"

namespace testutil {

inline bool close(double a, double b, double atol, double rtol = 0.0) {
  return std::fabs(a - b) <=
         atol + rtol * std::max(std::fabs(a), std::fabs(b));
}

inline void fill_uniform(std::vector<double>& v, cskit::Rng& rng,
                         double lo = -1.0, double hi = 1.0) {
  for (double& e : v) e = lo + (hi - lo) * rng.uniform();
}

inline cskit::la::Mat random_mat(std::size_t r, std::size_t c, cskit::Rng& rng,
                                 double lo = -1.0, double hi = 1.0) {
  cskit::la::Mat m(r, c);
  fill_uniform(m.a, rng, lo, hi);
  return m;
}

// Plain triple loop, j-i-k order.
inline cskit::la::Mat naive_matmul(const cskit::la::Mat& a,
                                   const cskit::la::Mat& b) {
  cskit::la::Mat c(a.rows, b.cols);
  for (std::size_t j = 0; j < b.cols; ++j)
    for (std::size_t i = 0; i < a.rows; ++i) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) acc += a(i, p) * b(p, j);
      c(i, j) = acc;
    }
  return c;
}

inline cskit::la::Vec naive_matvec(const cskit::la::Mat& a,
                                   const cskit::la::Vec& x) {
  cskit::la::Vec y(a.rows, 0.0);
  for (std::size_t j = 0; j < a.cols; ++j)
    for (std::size_t i = 0; i < a.rows; ++i) y[i] += a(i, j) * x[j];
  return y;
}

// Central finite difference of a scalar function of a flat vector.
inline std::vector<double> central_diff(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h = 1e-6) {
  std::vector<double> g(x.size());
  std::vector<double> p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double save = p[i];
    p[i] = save + h;
    const double fp = f(p);
    p[i] = save - h;
    const double fm = f(p);
    p[i] = save;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Max relative mismatch between an analytic gradient and its finite
// difference estimate, with an absolute floor for near-zero entries.
inline double max_grad_mismatch(const std::vector<double>& analytic,
                                const std::vector<double>& fd,
                                double floor_scale) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom =
        std::max({std::fabs(analytic[i]), std::fabs(fd[i]), floor_scale});
    worst = std::max(worst, std::fabs(analytic[i] - fd[i]) / denom);
  }
  return worst;
}

}  // namespace testutil
