#pragma once

#include <cstddef>

#include "cskit/linalg.hpp"

namespace cskit {

// Smoothness and texture penalties used as reconstruction priors. Each
// function returns the penalty value; when grad is non-null it is resized and
// overwritten with the derivative w.r.t. every sample.

// Mean squared difference of neighbours: (1/n) * sum_j (x_j - x_{j+1})^2.
// Signals shorter than 2 samples have no neighbour pairs and score 0.
double tv_1d(const la::Vec& x, la::Vec* grad = nullptr);

// Row direction and column direction mean squared neighbour differences:
// (1/H) * sum over vertical pairs + (1/W) * sum over horizontal pairs.
// A direction with fewer than 2 samples contributes 0.
double tv_2d(const la::Mat& img, la::Mat* grad = nullptr);

struct LvParams {
  std::size_t window = 3;
  std::size_t stride = 2;  // must stay below window so blocks overlap
};

// Mean population standard deviation over overlapping square blocks. Block
// starts along each axis are {0, stride, 2*stride, ...} plus a final start
// clamped to dim - window, so edge pixels are always covered. Constant
// blocks contribute 0 and have zero gradient there.
double local_variance(const la::Mat& img, const LvParams& p = {},
                      la::Mat* grad = nullptr);

}  // namespace cskit
