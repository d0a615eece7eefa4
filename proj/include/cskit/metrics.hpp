#pragma once

#include <cstddef>
#include <optional>

#include "cskit/linalg.hpp"

namespace cskit {

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;  // Gaussian window weight spread
  double k1 = 0.01;
  double k2 = 0.03;
};

double mse(const la::Vec& x, const la::Vec& y);
double mse(const la::Mat& x, const la::Mat& y);

// 10 * log10(range^2 / mse); +infinity when mse is 0.
double psnr(double mse_value, double data_range);

// Pearson correlation. Empty when either input is constant (the value is
// undefined there, not zero).
std::optional<double> pcc(const la::Vec& x, const la::Vec& y);

// Mean structural similarity over valid (fully inside) windows with
// Gaussian weights and population statistics. Signals shorter than the
// window fall back to one uniform window spanning the whole signal.
double ssim(const la::Vec& x, const la::Vec& y, double data_range,
            const SsimParams& p = {});
double ssim(const la::Mat& x, const la::Mat& y, double data_range,
            const SsimParams& p = {});

struct SignalMetrics {
  double mse = 0.0;
  double psnr = 0.0;
  std::optional<double> pcc;
  double ssim = 0.0;
};

// Metric bundle for a reconstruction against its reference. With normalize
// set (the default) both inputs go through the same affine map that sends the
// reference's [min, max] onto [0, 1], and data_range is 1; otherwise raw
// values are compared with data_range = max |reference|.
SignalMetrics compare_signals(const la::Vec& truth, const la::Vec& recon,
                              bool normalize = true);
SignalMetrics compare_images(const la::Mat& truth, const la::Mat& recon,
                             bool normalize = true);

}  // namespace cskit
