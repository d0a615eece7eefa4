#include "cskit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cskit/errors.hpp"
#include "cskit/rng.hpp"

namespace cskit {

namespace {

// Draw `take` distinct values from pool by partial Fisher-Yates; the chosen
// prefix order is part of the generator contract.
std::vector<std::size_t> draw_distinct(std::vector<std::size_t>& pool,
                                       std::size_t take, Rng& rng) {
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take)};
}

}  // namespace

GeneratedSignal generate_signal(const SignalSpec& spec,
                                const SparseBasis& basis) {
  const std::size_t n = spec.n;
  if (n == 0) throw ConfigError("generate_signal: n must be positive");
  if (basis.n != n)
    throw DimensionError("generate_signal: basis is for n=" +
                         std::to_string(basis.n));
  if (!(spec.kr > 0.0) || spec.kr > 1.0)
    throw ConfigError("generate_signal: kr must be in (0, 1]");
  if (spec.noise_level < 0.0)
    throw ConfigError("generate_signal: noise_level must be non-negative");
  const auto k = static_cast<std::size_t>(
      std::llround(spec.kr * static_cast<double>(n)));
  if (k == 0)
    throw ConfigError("generate_signal: kr too small, round(kr*n) is zero");

  // Magnitude profile over support ranks: peak 1 at rank K/8, spread K/4.
  const double mu = static_cast<double>(k) / 8.0;
  const double sd = static_cast<double>(k) / 4.0;
  la::Vec mags(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double d = static_cast<double>(i) - mu;
    mags[i] = std::exp(-d * d / (2.0 * sd * sd));
  }

  // The strongest ~10% of ranks must map to low frequencies. Ranks map to
  // support positions in sorted order below, so forcing the first
  // (max dominant rank + 1) positions into the low zone pins them all there.
  const auto n_dom = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(k))));
  std::vector<std::size_t> by_mag(k);
  std::iota(by_mag.begin(), by_mag.end(), std::size_t{0});
  std::stable_sort(by_mag.begin(), by_mag.end(),
                   [&](std::size_t a, std::size_t b) {
                     return mags[a] > mags[b];
                   });
  std::size_t max_dom_rank = 0;
  for (std::size_t q = 0; q < n_dom; ++q)
    max_dom_rank = std::max(max_dom_rank, by_mag[q]);
  const std::size_t n_forced = max_dom_rank + 1;
  const std::size_t low_zone = std::min(
      n, std::max(n_forced, static_cast<std::size_t>(std::llround(
                                0.15 * static_cast<double>(n)))));

  Rng rng(spec.seed);
  std::vector<std::size_t> low_pool(low_zone);
  std::iota(low_pool.begin(), low_pool.end(), std::size_t{0});
  std::vector<std::size_t> support = draw_distinct(low_pool, n_forced, rng);

  std::vector<std::uint8_t> taken(n, 0);
  for (const std::size_t p : support) taken[p] = 1;
  std::vector<std::size_t> rest_pool;
  rest_pool.reserve(n - n_forced);
  for (std::size_t p = 0; p < n; ++p)
    if (!taken[p]) rest_pool.push_back(p);
  const std::vector<std::size_t> rest =
      draw_distinct(rest_pool, k - n_forced, rng);
  support.insert(support.end(), rest.begin(), rest.end());
  std::sort(support.begin(), support.end());

  GeneratedSignal out;
  out.k = k;
  out.truth.values.assign(n, 0.0);
  out.truth.mask.assign(n, 0);
  for (std::size_t j = 0; j < k; ++j) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    out.truth.values[support[j]] = sign * mags[j];
    out.truth.mask[support[j]] = 1;
  }

  la::Vec coeffs = masked_values(out.truth);
  if (spec.noise_level > 0.0)
    for (std::size_t i = n / 2; i < n; ++i)
      coeffs[i] += spec.noise_level * rng.normal();
  out.x = la::matvec(basis.d, coeffs);
  return out;
}

la::Mat generate_signal_batch(const SignalSpec& spec, const SparseBasis& basis,
                              std::size_t count, la::Mat* truth_cols) {
  if (count == 0) throw ConfigError("generate_signal_batch: count must be >= 1");
  la::Mat x(spec.n, count);
  if (truth_cols) *truth_cols = la::Mat(spec.n, count);
  for (std::size_t j = 0; j < count; ++j) {
    SignalSpec one = spec;
    one.seed = spec.seed + j;
    const GeneratedSignal g = generate_signal(one, basis);
    la::set_col(x, j, g.x);
    if (truth_cols) la::set_col(*truth_cols, j, masked_values(g.truth));
  }
  return x;
}

la::Mat resize_area(const la::Mat& src, std::size_t h, std::size_t w) {
  if (src.empty()) throw DimensionError("resize_area: empty source");
  if (h == 0 || w == 0) throw ConfigError("resize_area: zero target size");
  if (h > src.rows || w > src.cols)
    throw ConfigError("resize_area: upscaling not supported");
  if (h == src.rows && w == src.cols) return src;

  const double sh = static_cast<double>(src.rows) / static_cast<double>(h);
  const double sw = static_cast<double>(src.cols) / static_cast<double>(w);
  la::Mat out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    const double r0 = static_cast<double>(i) * sh;
    const double r1 = r0 + sh;
    const auto rr0 = static_cast<std::size_t>(r0);
    const auto rr1 =
        std::min(src.rows, static_cast<std::size_t>(std::ceil(r1)));
    for (std::size_t j = 0; j < w; ++j) {
      const double c0 = static_cast<double>(j) * sw;
      const double c1 = c0 + sw;
      const auto cc0 = static_cast<std::size_t>(c0);
      const auto cc1 =
          std::min(src.cols, static_cast<std::size_t>(std::ceil(c1)));
      double acc = 0.0;
      for (std::size_t r = rr0; r < rr1; ++r) {
        const double wr = std::min(r1, static_cast<double>(r + 1)) -
                          std::max(r0, static_cast<double>(r));
        for (std::size_t c = cc0; c < cc1; ++c) {
          const double wc = std::min(c1, static_cast<double>(c + 1)) -
                            std::max(c0, static_cast<double>(c));
          acc += wr * wc * src(r, c);
        }
      }
      out(i, j) = acc / (sh * sw);
    }
  }
  return out;
}

la::Mat gaussian_blur(const la::Mat& src, double sigma) {
  if (src.empty()) throw DimensionError("gaussian_blur: empty image");
  if (sigma <= 0.0) return src;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  la::Vec kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
    const double v =
        std::exp(-static_cast<double>(d * d) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(d + radius)] = v;
    total += v;
  }
  for (double& e : kernel) e /= total;

  const auto rows = static_cast<std::ptrdiff_t>(src.rows);
  const auto cols = static_cast<std::ptrdiff_t>(src.cols);
  const auto clamp = [](std::ptrdiff_t v, std::ptrdiff_t hi) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, hi - 1));
  };

  la::Mat tmp(src.rows, src.cols);
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -radius; d <= radius; ++d)
        acc += kernel[static_cast<std::size_t>(d + radius)] *
               src(static_cast<std::size_t>(i), clamp(j + d, cols));
      tmp(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
    }
  la::Mat out(src.rows, src.cols);
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -radius; d <= radius; ++d)
        acc += kernel[static_cast<std::size_t>(d + radius)] *
               tmp(clamp(i + d, rows), static_cast<std::size_t>(j));
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
    }
  return out;
}

double column_mean_sparse_rate(const la::Mat& img, const SparseBasis& basis) {
  if (img.empty()) throw DimensionError("column_mean_sparse_rate: empty image");
  double acc = 0.0;
  for (std::size_t j = 0; j < img.cols; ++j)
    acc += sparse_rate(la::get_col(img, j), basis);
  return acc / static_cast<double>(img.cols);
}

la::Mat noise_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  if (h == 0 || w == 0) throw ConfigError("noise_image: zero size");
  la::Mat img(h, w);
  Rng rng(seed);
  for (double& e : img.a) e = rng.uniform();
  return img;
}

PreparedImage prepare_image(const la::Mat& source, const ImagePrepSpec& spec) {
  if (spec.height == 0 || spec.width == 0)
    throw ConfigError("prepare_image: zero target size");
  if (source.rows < spec.height || source.cols < spec.width)
    throw ConfigError("prepare_image: source smaller than target");
  if (!(spec.target_kr > 0.0) || spec.target_kr > 1.0)
    throw ConfigError("prepare_image: target_kr must be in (0, 1]");

  const SparseBasis basis = dct_basis(spec.height);
  const la::Mat resized = resize_area(source, spec.height, spec.width);

  PreparedImage best;
  best.img = resized;
  best.sigma = 0.0;
  best.achieved_kr = column_mean_sparse_rate(resized, basis);

  const auto consider = [&](const la::Mat& img, double sigma, double kr) {
    if (std::fabs(kr - spec.target_kr) <
        std::fabs(best.achieved_kr - spec.target_kr)) {
      best.img = img;
      best.sigma = sigma;
      best.achieved_kr = kr;
    }
  };
  const auto done = [&] {
    return std::fabs(best.achieved_kr - spec.target_kr) <= spec.kr_tol;
  };

  // Blur strictly smooths, so the rate only moves down from the resized
  // image's value; a target above that is unreachable.
  if (!done() && best.achieved_kr > spec.target_kr) {
    double lo = 0.0;       // rate(lo) > target
    double hi = 0.5;       // grows until rate(hi) <= target
    bool bracketed = false;
    while (hi <= 64.0) {
      const la::Mat img = gaussian_blur(resized, hi);
      const double kr = column_mean_sparse_rate(img, basis);
      consider(img, hi, kr);
      if (done()) break;
      if (kr <= spec.target_kr) {
        bracketed = true;
        break;
      }
      lo = hi;
      hi *= 2.0;
    }
    if (!done() && bracketed) {
      for (int iter = 0; iter < 40 && !done(); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-4) break;
        const la::Mat img = gaussian_blur(resized, mid);
        const double kr = column_mean_sparse_rate(img, basis);
        consider(img, mid, kr);
        if (kr > spec.target_kr)
          lo = mid;
        else
          hi = mid;
      }
    }
  }

  for (double& e : best.img.a) e = std::clamp(e, 0.0, 1.0);
  best.within_tol = done();
  return best;
}

}  // namespace cskit
