#include "cskit/priors.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "cskit/errors.hpp"

namespace cskit {

double tv_1d(const la::Vec& x, la::Vec* grad) {
  const std::size_t n = x.size();
  if (grad) grad->assign(n, 0.0);
  if (n < 2) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double d = x[j] - x[j + 1];
    acc += d * d;
    if (grad) {
      (*grad)[j] += 2.0 * inv_n * d;
      (*grad)[j + 1] -= 2.0 * inv_n * d;
    }
  }
  return acc * inv_n;
}

double tv_2d(const la::Mat& img, la::Mat* grad) {
  const std::size_t h = img.rows, w = img.cols;
  if (grad) *grad = la::Mat(h, w);
  double acc = 0.0;
  if (h >= 2) {
    const double inv_h = 1.0 / static_cast<double>(h);
    for (std::size_t i = 0; i + 1 < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const double d = img(i, j) - img(i + 1, j);
        acc += inv_h * d * d;
        if (grad) {
          (*grad)(i, j) += 2.0 * inv_h * d;
          (*grad)(i + 1, j) -= 2.0 * inv_h * d;
        }
      }
    }
  }
  if (w >= 2) {
    const double inv_w = 1.0 / static_cast<double>(w);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j + 1 < w; ++j) {
        const double d = img(i, j) - img(i, j + 1);
        acc += inv_w * d * d;
        if (grad) {
          (*grad)(i, j) += 2.0 * inv_w * d;
          (*grad)(i, j + 1) -= 2.0 * inv_w * d;
        }
      }
    }
  }
  return acc;
}

namespace {

std::vector<std::size_t> block_starts(std::size_t dim, std::size_t window,
                                      std::size_t stride) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= dim; s += stride) starts.push_back(s);
  const std::size_t last = dim - window;
  if (starts.empty() || starts.back() != last) starts.push_back(last);
  return starts;
}

}  // namespace

double local_variance(const la::Mat& img, const LvParams& p, la::Mat* grad) {
  const std::size_t h = img.rows, w = img.cols;
  if (p.window < 2) throw ConfigError("local_variance: window must be >= 2");
  if (p.stride < 1 || p.stride >= p.window)
    throw ConfigError("local_variance: stride must be in [1, window)");
  if (p.window > h || p.window > w)
    throw DimensionError("local_variance: window " + std::to_string(p.window) +
                         " exceeds image " + std::to_string(h) + "x" +
                         std::to_string(w));
  if (grad) *grad = la::Mat(h, w);

  const auto rows = block_starts(h, p.window, p.stride);
  const auto cols = block_starts(w, p.window, p.stride);
  const double count = static_cast<double>(p.window * p.window);
  const double inv_blocks =
      1.0 / static_cast<double>(rows.size() * cols.size());

  double acc = 0.0;
  for (const std::size_t r0 : rows) {
    for (const std::size_t c0 : cols) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t i = 0; i < p.window; ++i) {
        for (std::size_t j = 0; j < p.window; ++j) {
          const double v = img(r0 + i, c0 + j);
          sum += v;
          sum_sq += v * v;
        }
      }
      const double mean = sum / count;
      const double var = std::max(sum_sq / count - mean * mean, 0.0);
      const double sd = std::sqrt(var);
      acc += inv_blocks * sd;
      if (grad && sd > 0.0) {
        const double scale = inv_blocks / (count * sd);
        for (std::size_t i = 0; i < p.window; ++i)
          for (std::size_t j = 0; j < p.window; ++j)
            (*grad)(r0 + i, c0 + j) +=
                scale * (img(r0 + i, c0 + j) - mean);
      }
    }
  }
  return acc;
}

}  // namespace cskit
