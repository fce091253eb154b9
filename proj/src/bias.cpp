#include "fpk/bias.hpp"

#include <cmath>

#include "fpk/util.hpp"

namespace fpk {

std::uint64_t field_tag(const DensityField& f) { return hash_doubles(f.values); }

namespace {

Grid axis0_grid(const Grid& g) { return make_grid(1, {g.sizes[0]}); }

// Kahan-summed slice reduction of `values` (optionally weighted by a second
// field), scaled by the transverse cell volume.
std::vector<double> slice_integral(const Grid& g, const std::vector<double>& values,
                                   const double* weight) {
  const int n0 = g.sizes[0];
  const std::size_t slice = g.stride(0);
  double hprod = 1.0;
  for (int a = 1; a < g.n; ++a) hprod *= g.spacing[a];

  std::vector<double> out(n0);
  for (int j = 0; j < n0; ++j) {
    KahanSum acc;
    const std::size_t base = std::size_t(j) * slice;
    if (weight) {
      for (std::size_t i = 0; i < slice; ++i) acc.add(values[base + i] * weight[base + i]);
    } else {
      for (std::size_t i = 0; i < slice; ++i) acc.add(values[base + i]);
    }
    out[j] = hprod * acc.value();
  }
  return out;
}

}  // namespace

MarginalField marginal(const DensityField& f) {
  if (f.grid.n < 2)
    raise(ErrorCode::DimensionTooLow, "marginal requires at least 2 dimensions");
  if (f.values.size() != f.grid.total())
    raise(ErrorCode::GridMismatch, "value count does not match grid");

  MarginalField m;
  m.grid = axis0_grid(f.grid);
  m.values = slice_integral(f.grid, f.values, nullptr);
  return m;
}

namespace {

BiasState force_impl(const DensityField& f, const PotentialFields& pot, MarginalField marg,
                     const std::vector<double>& denominator, double floor) {
  if (pot.d1.grid != f.grid)
    raise(ErrorCode::GridMismatch, "potential evaluated on a different grid");
  if (floor < 0.0) raise(ErrorCode::ConstraintViolation, "floor must be non-negative");
  for (double v : f.values)
    if (!std::isfinite(v)) raise(ErrorCode::NonFiniteInput, "density contains a non-finite value");
  if (denominator.size() != std::size_t(f.grid.sizes[0]))
    raise(ErrorCode::GridMismatch, "denominator profile does not match the x1 grid");

  std::vector<double> num = slice_integral(f.grid, f.values, pot.d1.values.data());

  BiasState b;
  b.phi.grid = marg.grid;
  b.phi.values.resize(num.size());
  bool floored = false;
  for (std::size_t j = 0; j < num.size(); ++j) {
    double den = denominator[j];
    if (den <= 0.0 && floor == 0.0)
      raise(ErrorCode::DomainViolation, "marginal not positive at x1 index " + std::to_string(j));
    if (den < floor) {
      den = floor;
      floored = true;
    }
    b.phi.values[j] = num[j] / den;
  }
  b.marginal = std::move(marg);
  b.floor_used = floored ? floor : 0.0;
  b.source_tag = field_tag(f);
  return b;
}

}  // namespace

BiasState conditional_force(const DensityField& f, const PotentialFields& pot, double floor) {
  MarginalField m = marginal(f);
  std::vector<double> den = m.values;
  return force_impl(f, pot, std::move(m), den, floor);
}

BiasState conditional_force_with_denominator(const DensityField& f, const PotentialFields& pot,
                                             const MarginalField& denominator, double floor) {
  if (denominator.grid.n != 1)
    raise(ErrorCode::GridMismatch, "denominator profile must be 1-D");
  return force_impl(f, pot, marginal(f), denominator.values, floor);
}

MarginalField evolve_denominator(const MarginalField& m0, double t, double beta) {
  if (m0.grid.n != 1) raise(ErrorCode::GridMismatch, "denominator profile must be 1-D");
  if (t < 0.0) raise(ErrorCode::NegativeTime, "time must be non-negative");
  if (beta <= 0.0) raise(ErrorCode::NonPositiveBeta, "beta must be positive");
  if (t == 0.0) return m0;

  SpectralCoeffs c = forward_transform(m0);
  const double four_pi2 = 4.0 * M_PI * M_PI;
  const int N = m0.grid.sizes[0];
  for (int i = 0; i < N; ++i) {
    int k = i < N / 2 ? i : i - N;
    c.coeffs[i] *= std::exp(-t * four_pi2 * double(k) * double(k) / beta);
  }
  return inverse_transform(c);
}

}  // namespace fpk
