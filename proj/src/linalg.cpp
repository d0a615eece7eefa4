#include "cskit/linalg.hpp"

#include <cfloat>
#include <cmath>
#include <cstring>
#include <string>

#include "cskit/errors.hpp"
#include "cskit/kernels.hpp"

namespace cskit::la {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace

Mat identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat transpose(const Mat& m) {
  Mat t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

Vec matvec(const Mat& a, const Vec& x) {
  require(a.cols == x.size(), "matvec: A has " + std::to_string(a.cols) +
                                  " cols, x has " + std::to_string(x.size()));
  Vec y(a.rows);
  kern::gemv(a.data(), a.rows, a.cols, x.data(), y.data());
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  require(a.rows == x.size(), "matvec_t: A has " + std::to_string(a.rows) +
                                  " rows, x has " + std::to_string(x.size()));
  Vec y(a.cols);
  kern::gemv_t(a.data(), a.rows, a.cols, x.data(), y.data());
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  require(a.cols == b.rows, "matmul: inner dims " + std::to_string(a.cols) +
                                " vs " + std::to_string(b.rows));
  Mat c(a.rows, b.cols);
  kern::gemm(a.data(), b.data(), c.data(), a.rows, a.cols, b.cols);
  return c;
}

Vec get_col(const Mat& m, std::size_t j) {
  require(j < m.cols, "get_col: index out of range");
  Vec v(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) v[i] = m(i, j);
  return v;
}

void set_col(Mat& m, std::size_t j, const Vec& v) {
  require(j < m.cols && v.size() == m.rows, "set_col: shape mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) m(i, j) = v[i];
}

double norm2_sq(const Vec& v) { return kern::sum_sq(v.data(), v.size()); }

double norm2(const Vec& v) { return std::sqrt(norm2_sq(v)); }

double frob_norm(const Mat& m) {
  return std::sqrt(kern::sum_sq(m.data(), m.a.size()));
}

namespace {

// One Householder reflector H = I - tau v v^T with v[0] = 1. The tail of v
// overwrites x[1..]; returns {beta, tau} where H x = beta e1.
struct Reflector {
  double beta;
  double tau;
};

Reflector make_reflector(double* x, std::size_t len) {
  if (len == 0) return {0.0, 0.0};
  const double alpha = x[0];
  const double sigma = kern::sum_sq(x + 1, len - 1);
  if (sigma == 0.0) return {alpha, 0.0};
  const double norm = std::sqrt(alpha * alpha + sigma);
  const double beta = alpha >= 0.0 ? -norm : norm;
  const double scale = 1.0 / (alpha - beta);
  for (std::size_t i = 1; i < len; ++i) x[i] *= scale;
  return {beta, (beta - alpha) / beta};
}

// c <- H c for the reflector whose tail is v_tail (v[0] = 1 implicit).
void apply_reflector(const double* v_tail, double tau, double* c,
                     std::size_t len) {
  if (tau == 0.0 || len == 0) return;
  const double w = c[0] + kern::dot(v_tail, c + 1, len - 1);
  c[0] -= tau * w;
  kern::axpy(-tau * w, v_tail, c + 1, len - 1);
}

}  // namespace

LstsqResult lstsq_minnorm(const Mat& a, const Vec& b) {
  const std::size_t m = a.rows;
  const std::size_t k = a.cols;
  require(b.size() == m, "lstsq: b has " + std::to_string(b.size()) +
                             " entries, A has " + std::to_string(m) + " rows");
  LstsqResult out;
  out.x.assign(k, 0.0);
  if (m == 0 || k == 0) return out;

  // Working copy, one contiguous vector per column so reflector application
  // runs on unit-stride data.
  std::vector<Vec> col(k);
  std::vector<std::size_t> perm(k);
  for (std::size_t j = 0; j < k; ++j) {
    perm[j] = j;
    col[j] = get_col(a, j);
  }

  Vec qtb = b;
  Vec tau;
  Vec norms(k), norms_ref(k);
  for (std::size_t j = 0; j < k; ++j) norms[j] = norms_ref[j] = norm2_sq(col[j]);

  const std::size_t steps = m < k ? m : k;
  tau.reserve(steps);
  double diag0 = 0.0;
  std::size_t r = 0;

  for (std::size_t j = 0; j < steps; ++j) {
    // Pivot: bring the column with the largest remaining norm to position j.
    std::size_t piv = j;
    for (std::size_t c = j + 1; c < k; ++c)
      if (norms[c] > norms[piv]) piv = c;
    if (piv != j) {
      std::swap(col[j], col[piv]);
      std::swap(perm[j], perm[piv]);
      std::swap(norms[j], norms[piv]);
      std::swap(norms_ref[j], norms_ref[piv]);
    }

    const Reflector h = make_reflector(col[j].data() + j, m - j);
    tau.push_back(h.tau);
    col[j][j] = h.beta;
    if (j == 0) diag0 = std::fabs(h.beta);

    const double tol = std::max(m, k) * DBL_EPSILON * diag0;
    if (std::fabs(h.beta) <= tol) {
      tau.back() = 0.0;
      break;
    }
    r = j + 1;

    const double* v_tail = col[j].data() + j + 1;
    for (std::size_t c = j + 1; c < k; ++c) {
      apply_reflector(v_tail, h.tau, col[c].data() + j, m - j);
      // Downdate the pivot norm; recompute when cancellation has eaten it.
      const double rjc = col[c][j];
      norms[c] -= rjc * rjc;
      if (norms[c] < 1e-12 * norms_ref[c]) {
        norms[c] = kern::sum_sq(col[c].data() + j + 1, m - j - 1);
        norms_ref[c] = norms[c];
      }
    }
    apply_reflector(v_tail, h.tau, qtb.data() + j, m - j);
  }

  out.rank = r;
  if (r == 0) return out;

  // R z = c with R = r x k upper trapezoid, c = leading r entries of Q^T b.
  Vec z(k, 0.0);
  if (r == k) {
    for (std::size_t i = r; i-- > 0;) {
      double s = qtb[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= col[j][i] * z[j];
      z[i] = s / col[i][i];
    }
  } else {
    // Rank deficient: complete the decomposition. QR-factor R^T (k x r) so
    // that R = [U^T 0] Z^T; the minimum-norm solution is z = Z [w; 0] with
    // U^T w = c solved by forward substitution.
    std::vector<Vec> tcol(r);
    for (std::size_t c = 0; c < r; ++c) {
      tcol[c].assign(k, 0.0);
      for (std::size_t j = c; j < k; ++j) tcol[c][j] = col[j][c];
    }
    Vec ttau(r);
    for (std::size_t c = 0; c < r; ++c) {
      const Reflector h = make_reflector(tcol[c].data() + c, k - c);
      ttau[c] = h.tau;
      tcol[c][c] = h.beta;
      for (std::size_t c2 = c + 1; c2 < r; ++c2)
        apply_reflector(tcol[c].data() + c + 1, h.tau, tcol[c2].data() + c,
                        k - c);
    }
    Vec w(r);
    for (std::size_t i = 0; i < r; ++i) {
      double s = qtb[i];
      for (std::size_t j = 0; j < i; ++j) s -= tcol[i][j] * w[j];
      w[i] = s / tcol[i][i];
    }
    std::copy(w.begin(), w.end(), z.begin());
    for (std::size_t c = r; c-- > 0;)
      apply_reflector(tcol[c].data() + c + 1, ttau[c], z.data() + c, k - c);
  }

  for (std::size_t j = 0; j < k; ++j) out.x[perm[j]] = z[j];
  return out;
}

double spectral_norm_sq(const Mat& a, std::size_t max_iters, double tol) {
  if (a.empty()) return 0.0;
  const std::size_t n = a.cols;
  Vec v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vec u = matvec(a, v);
    Vec w = matvec_t(a, u);
    const double next = norm2(w);
    if (next == 0.0) return 0.0;
    const double inv = 1.0 / next;
    for (double& e : w) e *= inv;
    v = std::move(w);
    const bool settled = std::fabs(next - lambda) <= tol * next;
    lambda = next;
    if (settled) break;
  }
  return lambda;
}

}  // namespace cskit::la
