#pragma once

#include <cstdint>
#include <vector>

#include "cskit/linalg.hpp"
#include "cskit/rng.hpp"

namespace cskit {

// Orthonormal synthesis dictionary: x = d s, and since d^T d = I also
// s = d^T x.
struct SparseBasis {
  std::size_t n = 0;
  la::Mat d;  // n x n
};

// Orthonormal DCT-II basis. Column 0 is the constant atom.
SparseBasis dct_basis(std::size_t n);
SparseBasis identity_basis(std::size_t n);

struct SensingMatrix {
  std::size_t m = 0;
  std::size_t n = 0;
  double sr = 0.0;
  std::uint64_t seed = 0;
  la::Mat mat;  // m x n
};

// i.i.d. N(0, 1/m) entries, m = floor(n * sr). Entries are drawn row by row
// from a fresh generator, so the matrix is a pure function of (n, sr, seed).
SensingMatrix gaussian_sensing_matrix(std::size_t n, double sr,
                                      std::uint64_t seed);

// Everything a solver needs: the sensing operator, the dictionary, and their
// product a = sensing * basis applied to coefficient vectors.
struct MeasurementSetup {
  std::size_t n = 0;
  std::size_t m = 0;
  double sr = 0.0;
  std::uint64_t seed = 0;
  la::Mat sensing;  // m x n
  la::Mat basis;    // n x n
  la::Mat a;        // m x n
};

MeasurementSetup compose_setup(const SensingMatrix& sensing,
                               const SparseBasis& basis);
// Gaussian sensing matrix + DCT basis in one call.
MeasurementSetup make_setup(std::size_t n, double sr, std::uint64_t seed);

struct Measurement {
  la::Vec y;
  double noise_level = 0.0;
};

struct MeasurementBatch {
  la::Mat y;  // m x count, one column per signal
  double noise_level = 0.0;
};

// y = sensing * x + xi with xi ~ N(0, noise_level^2). noise_level == 0 does
// not consume any generator state.
Measurement measure(const MeasurementSetup& setup, const la::Vec& x,
                    double noise_level, Rng& rng);
// Columns of x_cols are measured left to right against the shared setup, so
// column 0 of the result matches a single measure() call with the same rng.
MeasurementBatch measure_batch(const MeasurementSetup& setup,
                               const la::Mat& x_cols, double noise_level,
                               Rng& rng);

// Coefficient estimate with an explicit support mask; the effective vector is
// values masked entrywise.
struct SparseCoefficients {
  la::Vec values;
  std::vector<std::uint8_t> mask;
};

la::Vec masked_values(const SparseCoefficients& s);
// a * (values .* mask) - y
la::Vec residual(const MeasurementSetup& setup, const SparseCoefficients& s,
                 const la::Vec& y);

// Fraction of basis coefficients (smallest count / n, counted over the
// magnitude-sorted coefficients) needed to reach the given share of total
// absolute coefficient mass. Zero signal -> 0.
double sparse_rate(const la::Vec& x, const SparseBasis& basis,
                   double energy_fraction = 0.98);

}  // namespace cskit
