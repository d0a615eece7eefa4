#include "cskit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cskit/errors.hpp"
#include "cskit/kernels.hpp"

namespace cskit {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": size mismatch " +
                         std::to_string(a) + " vs " + std::to_string(b));
}

la::Vec gaussian_window(std::size_t len, double sigma) {
  la::Vec g(len);
  const double center = 0.5 * static_cast<double>(len - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d = static_cast<double>(i) - center;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += g[i];
  }
  for (double& e : g) e /= total;
  return g;
}

double ssim_term(double mx, double my, double sxx, double syy, double sxy,
                 double c1, double c2) {
  return ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
         ((mx * mx + my * my + c1) * (sxx + syy + c2));
}

}  // namespace

double mse(const la::Vec& x, const la::Vec& y) {
  require_same(x.size(), y.size(), "mse");
  if (x.empty()) throw DimensionError("mse: empty input");
  return kern::sum_sq_diff(x.data(), y.data(), x.size()) /
         static_cast<double>(x.size());
}

double mse(const la::Mat& x, const la::Mat& y) {
  require_same(x.rows, y.rows, "mse rows");
  require_same(x.cols, y.cols, "mse cols");
  if (x.empty()) throw DimensionError("mse: empty input");
  return kern::sum_sq_diff(x.data(), y.data(), x.a.size()) /
         static_cast<double>(x.a.size());
}

double psnr(double mse_value, double data_range) {
  if (mse_value < 0.0) throw ConfigError("psnr: negative mse");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse_value);
}

std::optional<double> pcc(const la::Vec& x, const la::Vec& y) {
  require_same(x.size(), y.size(), "pcc");
  const std::size_t n = x.size();
  if (n == 0) throw DimensionError("pcc: empty input");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double ssim(const la::Vec& x, const la::Vec& y, double data_range,
            const SsimParams& p) {
  require_same(x.size(), y.size(), "ssim");
  const std::size_t n = x.size();
  if (n == 0) throw DimensionError("ssim: empty input");
  if (!(data_range > 0.0)) throw ConfigError("ssim: data_range must be > 0");
  const double c1 = (p.k1 * data_range) * (p.k1 * data_range);
  const double c2 = (p.k2 * data_range) * (p.k2 * data_range);

  const std::size_t win = std::min(p.window, n);
  la::Vec g;
  if (n < p.window) {
    // Too short for sliding windows: one uniform window over everything.
    g.assign(win, 1.0 / static_cast<double>(win));
  } else {
    g = gaussian_window(win, p.sigma);
  }

  double acc = 0.0;
  const std::size_t positions = n - win + 1;
  for (std::size_t j0 = 0; j0 < positions; ++j0) {
    double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
      const double w = g[i];
      const double xv = x[j0 + i];
      const double yv = y[j0 + i];
      mx += w * xv;
      my += w * yv;
      xx += w * xv * xv;
      yy += w * yv * yv;
      xy += w * xv * yv;
    }
    acc += ssim_term(mx, my, xx - mx * mx, yy - my * my, xy - mx * my, c1, c2);
  }
  return acc / static_cast<double>(positions);
}

double ssim(const la::Mat& x, const la::Mat& y, double data_range,
            const SsimParams& p) {
  require_same(x.rows, y.rows, "ssim rows");
  require_same(x.cols, y.cols, "ssim cols");
  if (x.empty()) throw DimensionError("ssim: empty input");
  if (!(data_range > 0.0)) throw ConfigError("ssim: data_range must be > 0");
  if (x.rows < p.window || x.cols < p.window)
    throw DimensionError("ssim: image smaller than " +
                         std::to_string(p.window) + "x" +
                         std::to_string(p.window) + " window");
  const double c1 = (p.k1 * data_range) * (p.k1 * data_range);
  const double c2 = (p.k2 * data_range) * (p.k2 * data_range);
  const la::Vec g = gaussian_window(p.window, p.sigma);

  const std::size_t hpos = x.rows - p.window + 1;
  const std::size_t wpos = x.cols - p.window + 1;
  double acc = 0.0;
  for (std::size_t i0 = 0; i0 < hpos; ++i0) {
    for (std::size_t j0 = 0; j0 < wpos; ++j0) {
      double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
      for (std::size_t i = 0; i < p.window; ++i) {
        const double wi = g[i];
        for (std::size_t j = 0; j < p.window; ++j) {
          const double w = wi * g[j];
          const double xv = x(i0 + i, j0 + j);
          const double yv = y(i0 + i, j0 + j);
          mx += w * xv;
          my += w * yv;
          xx += w * xv * xv;
          yy += w * yv * yv;
          xy += w * xv * yv;
        }
      }
      acc +=
          ssim_term(mx, my, xx - mx * mx, yy - my * my, xy - mx * my, c1, c2);
    }
  }
  return acc / static_cast<double>(hpos * wpos);
}

namespace {

struct Normalized {
  la::Vec a, b;
  double range = 1.0;
};

// Map both inputs through the affine transform sending the reference's
// [min, max] to [0, 1]. A constant reference cannot anchor such a map, so the
// raw values are kept and the range falls back to the reference magnitude.
Normalized normalize_pair(const la::Vec& truth, const la::Vec& recon,
                          bool normalize) {
  Normalized out;
  out.a = truth;
  out.b = recon;
  const auto [mn_it, mx_it] = std::minmax_element(truth.begin(), truth.end());
  const double mn = *mn_it, mx = *mx_it;
  if (normalize && mx > mn) {
    const double inv = 1.0 / (mx - mn);
    for (double& e : out.a) e = (e - mn) * inv;
    for (double& e : out.b) e = (e - mn) * inv;
    out.range = 1.0;
  } else {
    const double mag = std::max(std::fabs(mn), std::fabs(mx));
    out.range = mag > 0.0 ? mag : 1.0;
  }
  return out;
}

}  // namespace

SignalMetrics compare_signals(const la::Vec& truth, const la::Vec& recon,
                              bool normalize) {
  require_same(truth.size(), recon.size(), "compare_signals");
  const Normalized nz = normalize_pair(truth, recon, normalize);
  SignalMetrics out;
  out.mse = mse(nz.a, nz.b);
  out.psnr = psnr(out.mse, nz.range);
  out.pcc = pcc(nz.a, nz.b);
  out.ssim = ssim(nz.a, nz.b, nz.range);
  return out;
}

SignalMetrics compare_images(const la::Mat& truth, const la::Mat& recon,
                             bool normalize) {
  require_same(truth.rows, recon.rows, "compare_images rows");
  require_same(truth.cols, recon.cols, "compare_images cols");
  const Normalized nz = normalize_pair(truth.a, recon.a, normalize);
  SignalMetrics out;
  out.mse = mse(nz.a, nz.b);
  out.psnr = psnr(out.mse, nz.range);
  out.pcc = pcc(nz.a, nz.b);
  la::Mat ta(truth.rows, truth.cols), tb(truth.rows, truth.cols);
  ta.a = nz.a;
  tb.a = nz.b;
  out.ssim = ssim(ta, tb, nz.range);
  return out;
}

}  // namespace cskit
