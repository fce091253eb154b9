#pragma once

#include <cstdint>

#include "fpk/grid.hpp"
#include "fpk/potential.hpp"

namespace fpk {

/// Conditional mean force and the marginal it was derived from.  source_tag
/// identifies the density the state was computed for, so steppers can refuse
/// stale bias data.
struct BiasState {
  MarginalField phi;       // conditional force profile on the x1 grid
  MarginalField marginal;  // density marginal, same grid
  double floor_used = 0.0; // positivity floor actually applied, 0 if none
  std::uint64_t source_tag = 0;
};

std::uint64_t field_tag(const DensityField& f);

/// Integrates axes 1..n-1 away: marginal(j) = prod_{i>=1}(h_i) * slice sum.
/// Requires n >= 2.
MarginalField marginal(const DensityField& f);

/// phi(j) = slice integral of dV/dx1 * psi over slice j, divided by
/// max(marginal(j), floor).  Numerator and denominator share the same
/// nodal quadrature, so phi is a convex combination of dV/dx1 slice values
/// and in particular sup|phi| <= sup|dV/dx1| at grid level.
/// floor = 0 demands a strictly positive marginal.
BiasState conditional_force(const DensityField& f, const PotentialFields& pot, double floor);

/// Same force, but against an externally evolved denominator profile
/// (the decoupled formulation of the nonlocal term).
BiasState conditional_force_with_denominator(const DensityField& f, const PotentialFields& pot,
                                             const MarginalField& denominator, double floor);

/// Exact 1-D heat flow: multiplies mode k by exp(-t * 4 pi^2 k^2 / beta).
/// t = 0 returns the input unchanged.
MarginalField evolve_denominator(const MarginalField& m0, double t, double beta);

}  // namespace fpk
