#pragma once

#include <span>
#include <vector>

#include "fpk/grid.hpp"

namespace fpk {

enum class PotentialKind { Zero, Cosine1d, Coupled, CustomSeries };

/// One separable term amplitude * prod_i cos(2*pi*modes[i]*x_i).
/// Axes beyond modes.size() are treated as mode 0 (constant factor 1).
struct PotentialTerm {
  double amplitude = 0.0;
  std::vector<int> modes;

  bool operator==(const PotentialTerm&) const = default;
};

/// Smooth trigonometric potential.  The built-in kinds are
///   zero                 V = 0
///   cosine1d             V = a cos(2 pi x1)
///   coupled              V = a cos(2 pi x1) + c cos(2 pi x1) cos(2 pi x2)
/// and custom-series is an arbitrary finite list of separable cosine terms.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Zero;
  double a = 0.0;
  double c = 0.0;
  std::vector<PotentialTerm> terms;  // CustomSeries only

  static PotentialSpec zero();
  static PotentialSpec cosine1d(double a);
  static PotentialSpec coupled(double a, double c);
  static PotentialSpec custom(std::vector<PotentialTerm> terms);

  /// Canonical term list for any kind (built-ins expand to 0..2 terms).
  std::vector<PotentialTerm> term_list() const;
  /// True if the potential only depends on x1.
  bool depends_on_x1_only() const;

  bool operator==(const PotentialSpec&) const = default;
};

/// Pointwise evaluators at an arbitrary coordinate (used for refined-grid
/// scans that never materialize a field).
double eval_potential(const PotentialSpec& spec, std::span<const double> x);
double eval_derivative(const PotentialSpec& spec, std::span<const double> x, int axis);
double eval_second_derivative(const PotentialSpec& spec, std::span<const double> x, int axis_i,
                              int axis_j);

/// The potential and every derivative the solver needs, sampled on a grid.
struct PotentialFields {
  DensityField v;                  // V
  DensityField d1;                 // dV/dx1
  DensityField d11;                // d^2V/dx1^2
  DensityField lap;                // Laplacian of V
  std::vector<DensityField> grad;  // all n components of the gradient
};

PotentialFields eval_fields(const PotentialSpec& spec, const Grid& g);

/// Grid sup norms of V and its derivatives.  c2 follows the classical
/// definition max_{|i|<=2} sup |D^i V| plus the largest second-derivative
/// sup standing in for the Hoelder seminorm.
struct PotentialNorms {
  double d1_sup = 0.0;    // |dV/dx1|
  double grad_sup = 0.0;  // pointwise Euclidean norm of the gradient
  double lap_sup = 0.0;   // |Laplacian V|
  double d11_sup = 0.0;   // |d^2V/dx1^2|
  double c2 = 0.0;

  /// The four-term sup-norm sum used by the drift bound.
  double sum4() const { return d1_sup + grad_sup + lap_sup + d11_sup; }
};

PotentialNorms sup_norms(const PotentialSpec& spec, const Grid& g);

/// Damping coefficient of the 1-D supersolution equation:
///   delta = -max_x ( Lap(V)/2 - (beta/4)|grad V|^2
///                    + (beta/2)|dV/dx1| * sup|dV/dx1| ).
/// Maximized over the continuum: a coarse periodic scan locates the argmax
/// basin, then the window shrinks around it until the value converges well
/// past 1e-6 relative.  `g` only fixes the dimension.
double compute_delta(const PotentialSpec& spec, const Grid& g, double beta);

/// Lattice-restricted evaluation of the same maximand (no refinement);
/// exposed so refinement monotonicity is testable.
double compute_delta_at(const PotentialSpec& spec, const std::vector<int>& sizes, double beta);

}  // namespace fpk
