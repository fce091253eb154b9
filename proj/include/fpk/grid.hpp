#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "fpk/errors.hpp"

namespace fpk {

/// Uniform collocation grid on the unit torus [0,1)^n.  Values are stored
/// row-major with axis 0 slowest, so the slice over axes 1..n-1 at a fixed
/// x1 index is contiguous.
struct Grid {
  int n = 0;
  std::vector<int> sizes;
  std::vector<double> spacing;  // 1 / sizes[i]

  std::size_t total() const;
  /// Linear stride of one step along `axis`.
  std::size_t stride(int axis) const;
  /// Node coordinate along `axis`: index / sizes[axis].
  double node(int axis, int index) const { return double(index) / double(sizes[axis]); }
  /// Signed integer wavenumber for a transform index along `axis`,
  /// in [-N/2, N/2).
  int wavenumber(int axis, int index) const {
    int N = sizes[axis];
    return index < N / 2 ? index : index - N;
  }
  /// Index along `axis` of the flattened position `idx`.
  int axis_index(int axis, std::size_t idx) const {
    return int((idx / stride(axis)) % std::size_t(sizes[axis]));
  }

  bool operator==(const Grid&) const = default;
};

/// All sizes must be even (unambiguous Nyquist) and at least 8.
Grid make_grid(int n, const std::vector<int>& sizes);

/// Real scalar field sampled at the grid nodes.
struct DensityField {
  Grid grid;
  std::vector<double> values;
};

/// 1-D fields of the first coordinate (marginals, bias profiles,
/// supersolutions).  Producing operations guarantee grid.n == 1.
using MarginalField = DensityField;

/// Fourier coefficients in transform layout: coeffs[0] is the mean, index k
/// along each axis carries wavenumber k for k < N/2 and k - N otherwise.
struct SpectralCoeffs {
  Grid grid;
  std::vector<std::complex<double>> coeffs;
};

DensityField make_field(const Grid& g, double fill = 0.0);

/// Rectangle-rule integral over the torus: prod(h) * sum(values).
/// Exact for trigonometric polynomials below the Nyquist band.
double integrate(const DensityField& f);

SpectralCoeffs forward_transform(const DensityField& f);
DensityField inverse_transform(const SpectralCoeffs& c);

/// Multiplies coefficients by (2*pi*i*k)^order along `axis` in place.
/// Order 1 zeroes the Nyquist mode; order 2 keeps it (real multiplier).
void apply_derivative(SpectralCoeffs& c, int axis, int order);

/// Spectral partial derivative of order 1 or 2 along `axis`.
DensityField spectral_derivative(const DensityField& f, int axis, int order);

namespace detail {
/// Number of worker threads for element-wise loops; reductions are always
/// serial so results do not depend on this.
void set_pointwise_threads(int k);
int pointwise_threads();
}  // namespace detail

}  // namespace fpk
