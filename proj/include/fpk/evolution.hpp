#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fpk/bias.hpp"
#include "fpk/config.hpp"
#include "fpk/diagnostics.hpp"
#include "fpk/grid.hpp"
#include "fpk/potential.hpp"

namespace fpk {

struct StepControl {
  double dt = 0.0;
  Scheme scheme = Scheme::Imex;
  double picard_tol = 1e-10;
  int picard_max_iter = 50;
  bool conservative_form = true;
  double domain_floor = 1e-12;
};

/// Solver state at one time level.  `bias` is always the force derived from
/// `psi`; steppers refuse to run when the tag shows it is stale.
struct SolverState {
  double t = 0.0;
  double beta = 0.0;
  DensityField psi;
  BiasState bias;
  std::optional<MarginalField> supersolution;

  // filled by the last step call
  double last_step_dt = 0.0;
  int last_step_iterations = 0;
  std::vector<double> last_picard_diffs;
};

SolverState make_state(DensityField psi0, double beta, const PotentialFields& pot, double floor);

/// Everything outside the diffusion: F = div(grad V psi) - d/dx1(phi psi).
/// Divergences are spectral derivatives of nodal products; in conservative
/// form mode 0 of F vanishes identically, so the step preserves mass.
/// The expanded variant uses grad V . grad psi + (Lap V) psi for the first
/// group instead.
DensityField drift_term(const DensityField& psi, const PotentialFields& pot,
                        const BiasState& bias, bool conservative);

/// First order splitting: explicit Euler on the drift, then the exact heat
/// propagator over dt.
SolverState step_imex(const SolverState& s, const StepControl& ctl, const PotentialFields& pot);

/// Fixed-point iteration on the integral form of one step,
///   psi_{m+1} = heat(psi_n, dt) + dt * heat(F(psi_m), dt/2),
/// iterated until the sup-norm update falls below picard_tol.  If it fails
/// to contract within picard_max_iter the step halves dt and retries, down
/// to dt = 1e-10.
SolverState step_picard(const SolverState& s, const StepControl& ctl, const PotentialFields& pot);

/// Advances the 1-D dominating profile with the state's current force:
/// explicit Euler on (-delta M - d/dx1(phi M)), then exact 1-D heat.
MarginalField step_supersolution(const SolverState& s, double delta, double dt);

using SnapshotSink = std::function<void(long long step, double t, const DensityField&)>;

/// Runs the configured trajectory and returns the diagnostics history.
/// Stepper failures are recorded in the history rather than thrown.
RunHistory run(const RunConfig& cfg, const SnapshotSink& sink = {});

}  // namespace fpk
