#pragma once

#include <cstdint>
#include <vector>

#include "cskit/linalg.hpp"
#include "cskit/sensing.hpp"

namespace cskit {

struct SignalSpec {
  std::size_t n = 0;
  double kr = 0.0;            // sparsity ratio; K = round(kr * n) nonzeros
  double noise_level = 1e-3;  // sigma of the upper-band coefficient noise
  std::uint64_t seed = 0;
};

struct GeneratedSignal {
  la::Vec x;                 // synthesized signal, length n
  SparseCoefficients truth;  // clean K-sparse coefficient ground truth
  std::size_t k = 0;
};

// Draws a K-sparse coefficient vector whose magnitudes, read along the
// support in frequency order, trace a Gaussian bump with an early peak
// (rank K/8) and a long tail (spread K/4, peak height 1). The strongest
// tenth of the coefficients always lands in the lowest 15% of frequencies;
// the rest scatter uniformly. Signs are random. The synthesized signal also
// carries N(0, noise_level^2) perturbations on the upper half of the
// spectrum; the returned ground truth stays clean.
GeneratedSignal generate_signal(const SignalSpec& spec,
                                const SparseBasis& basis);

// Columns are independent signals; column j uses seed spec.seed + j.
// When truth_cols is non-null it receives the clean coefficient columns.
la::Mat generate_signal_batch(const SignalSpec& spec, const SparseBasis& basis,
                              std::size_t count, la::Mat* truth_cols = nullptr);

// Box-filter downscale with fractional pixel coverage. Output values are
// convex combinations of inputs, so no new extrema appear.
la::Mat resize_area(const la::Mat& src, std::size_t h, std::size_t w);

// Separable Gaussian blur, radius ceil(3 sigma), replicated edges.
// sigma <= 0 returns the input unchanged.
la::Mat gaussian_blur(const la::Mat& src, double sigma);

// Mean sparse_rate over the image's columns; the knob prepare_image tunes.
double column_mean_sparse_rate(const la::Mat& img, const SparseBasis& basis);

// Uniform [0,1) pixels, the default raw material for synthetic images.
la::Mat noise_image(std::size_t h, std::size_t w, std::uint64_t seed);

struct ImagePrepSpec {
  std::size_t height = 0;
  std::size_t width = 0;
  double target_kr = 0.0;
  double kr_tol = 0.03;
};

struct PreparedImage {
  la::Mat img;
  double achieved_kr = 0.0;
  double sigma = 0.0;       // blur strength that produced img
  bool within_tol = false;  // achieved_kr landed inside target +- kr_tol
};

// Resize the source to the requested shape, then search the blur strength
// until the column-averaged sparse rate meets target_kr. Blur only ever
// lowers the rate, so targets above the resized image's rate come back
// best-effort with within_tol false.
PreparedImage prepare_image(const la::Mat& source, const ImagePrepSpec& spec);

}  // namespace cskit
