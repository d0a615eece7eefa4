#pragma once

#include <cstddef>
#include <vector>

namespace cskit::la {

using Vec = std::vector<double>;

// Dense row-major matrix. Plain aggregate on purpose: modules pass these
// around by value or const reference and reach into .a for kernel calls.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  double* data() { return a.data(); }
  const double* data() const { return a.data(); }
  bool empty() const { return rows == 0 || cols == 0; }
};

Mat identity(std::size_t n);
Mat transpose(const Mat& m);

// y = A x
Vec matvec(const Mat& a, const Vec& x);
// y = A^T x
Vec matvec_t(const Mat& a, const Vec& x);
// C = A B
Mat matmul(const Mat& a, const Mat& b);

Vec get_col(const Mat& m, std::size_t j);
void set_col(Mat& m, std::size_t j, const Vec& v);

double norm2_sq(const Vec& v);
double norm2(const Vec& v);
double frob_norm(const Mat& m);

struct LstsqResult {
  Vec x;
  std::size_t rank = 0;
};

// Minimum-norm least-squares solution of A x ~ b via column-pivoted
// Householder QR, falling back to a complete orthogonal decomposition when A
// is numerically rank deficient. Never throws on rank deficiency; among all
// residual minimizers the one with smallest 2-norm is returned.
LstsqResult lstsq_minnorm(const Mat& a, const Vec& b);

// Largest squared singular value of A, by power iteration on A^T A with a
// fixed deterministic start vector. Used for solver step sizing.
double spectral_norm_sq(const Mat& a, std::size_t max_iters = 500,
                        double tol = 1e-12);

}  // namespace cskit::la
