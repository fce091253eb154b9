#pragma once

#include <span>
#include <string>
#include <vector>

#include "fpk/config.hpp"
#include "fpk/errors.hpp"
#include "fpk/grid.hpp"

namespace fpk {

enum class CheckStatus { Pass, Fail, Converging };

const char* to_string(CheckStatus s);

/// Outcome of one property check.  Fixed-tolerance checks pass iff
/// measured <= threshold; refinement checks report status Converging and
/// store the empirical order in `measured` with the minimum acceptable
/// order in `threshold`.
struct PropertyReport {
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  double measured = 0.0;
  double threshold = 0.0;
  double t_worst = 0.0;
  std::string details;
};

/// One row of the diagnostics time series.
struct SeriesRecord {
  double t = 0.0;
  double mass = 0.0;
  double min_psi = 0.0;
  double linf_psi = 0.0;
  double h_sigma_norm = 0.0;      // H^1.5 norm of psi
  double l4_norm = 0.0;
  double f_l2_norm = 0.0;         // L2 norm of the drift operator
  double propol_c = 0.0;          // explicit drift-bound constant C(t)
  double super_violation = 0.0;   // sup (psi e^{beta V / 2} - barrier)_+
  double marginal_heat_err = 0.0; // |marginal - exact 1-D heat|_inf
  double formulation_err = 0.0;   // |co-evolved denominator - marginal|_inf
  // not serialized to series.csv, used by checks:
  double phi_linf = 0.0;
  double floor_used = 0.0;
};

/// Everything one run produced.  Failure of the stepper is recorded, not
/// rethrown, so partial histories stay inspectable.
struct RunHistory {
  double dt = 0.0;
  double beta = 0.0;
  double t_final = 0.0;
  Scheme scheme = Scheme::Imex;
  bool conservative = true;
  bool supersolution_enabled = false;
  double d1v_sup = 0.0;   // sup |dV/dx1| on the run grid
  double delta = 0.0;     // supersolution damping coefficient (if enabled)
  std::vector<SeriesRecord> records;
  std::vector<std::pair<long long, DensityField>> snapshots;
  DensityField final_psi;

  bool aborted = false;
  ErrorCode abort_code = ErrorCode::NonFinite;
  double abort_time = 0.0;
  std::string abort_message;
};

// Fixed-tolerance checks over a single run.
PropertyReport check_mass(const RunHistory& h);
PropertyReport check_positivity(const RunHistory& h);
PropertyReport check_phi_bound(const RunHistory& h);
PropertyReport check_f_bound(const RunHistory& h);
PropertyReport check_orbit_bounded(const RunHistory& h);

// Refinement checks over a dt ladder (each history halves the previous dt).
// The worst per-run error must shrink at the scheme order; a ladder whose
// errors all sit at the rounding floor counts as converged outright (the
// report then stores the worst error against the floor threshold instead of
// an order).
PropertyReport check_marginal_heat(std::span<const RunHistory> ladder);
PropertyReport check_supersolution(std::span<const RunHistory> ladder);
PropertyReport check_formulation_equivalence(std::span<const RunHistory> ladder);

/// Empirical order log2(e_coarse / e_fine) per refinement step; returns the
/// worst (smallest) order over the ladder.
double empirical_order(std::span<const double> errors);

/// Runs every check whose name appears in `names` (see config `checks`).
/// Refinement checks receive the ladder; the others use ladder.front().
std::vector<PropertyReport> run_checks(std::span<const std::string> names,
                                       std::span<const RunHistory> ladder);

}  // namespace fpk
