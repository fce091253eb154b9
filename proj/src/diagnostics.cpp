#include "fpk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace fpk {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Converging:
      return "converging";
  }
  return "unknown";
}

namespace {

constexpr double kRoundingFloor = 1e-12;

template <class... Args>
std::string strfmt(const char* pattern, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

void require_records(const RunHistory& h) {
  if (h.records.empty()) raise(ErrorCode::EmptyHistory, "history has no records");
}

/// Worst value of one monitored column per run, plus where the finest run
/// peaked.  Also validates that the ladder halves dt at every rung.
struct LadderErrors {
  std::vector<double> errs;
  double t_worst = 0.0;
};

LadderErrors ladder_errors(std::span<const RunHistory> ladder, double SeriesRecord::*column) {
  if (ladder.empty()) raise(ErrorCode::EmptyHistory, "refinement ladder is empty");
  if (ladder.size() < 2)
    raise(ErrorCode::RunTooShort, "refinement ladder needs at least two runs");
  LadderErrors out;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    require_records(ladder[i]);
    if (i > 0 && std::abs(ladder[i - 1].dt / ladder[i].dt - 2.0) > 1e-9)
      raise(ErrorCode::ConstraintViolation, "refinement ladder must halve dt at every rung");
    double worst = -1.0;
    double at = 0.0;
    for (const auto& rec : ladder[i].records) {
      double e = rec.*column;
      if (e > worst) {
        worst = e;
        at = rec.t;
      }
    }
    out.errs.push_back(worst);
    out.t_worst = at;
  }
  return out;
}

std::string list_errors(const std::vector<double>& errs) {
  std::string s = "E per refinement:";
  for (double e : errs) s += strfmt(" %.3e", e);
  return s;
}

PropertyReport converging_report(const char* name, const LadderErrors& le, double min_order,
                                 double max_order) {
  PropertyReport r;
  r.name = name;
  r.t_worst = le.t_worst;

  bool at_floor = std::all_of(le.errs.begin(), le.errs.end(),
                              [](double e) { return e <= kRoundingFloor; });
  if (at_floor) {
    r.status = CheckStatus::Converging;
    r.measured = *std::max_element(le.errs.begin(), le.errs.end());
    r.threshold = kRoundingFloor;
    r.details = "all refinement errors at the rounding floor; " + list_errors(le.errs);
    return r;
  }

  double order = empirical_order(le.errs);
  r.measured = order;
  r.threshold = min_order;
  bool in_window = order >= min_order && order <= max_order;
  r.status = in_window ? CheckStatus::Converging : CheckStatus::Fail;
  r.details = strfmt("empirical order %.3f, window [%g, %g]; ", order, min_order, max_order) +
              list_errors(le.errs);
  return r;
}

}  // namespace

double empirical_order(std::span<const double> errors) {
  if (errors.size() < 2)
    raise(ErrorCode::RunTooShort, "order estimate needs at least two refinement errors");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < errors.size(); ++i) {
    double coarse = errors[i - 1];
    double fine = errors[i];
    double order = (coarse == 0.0 && fine == 0.0) ? std::numeric_limits<double>::infinity()
                                                  : std::log2(coarse / fine);
    worst = std::min(worst, order);
  }
  return worst;
}

PropertyReport check_mass(const RunHistory& h) {
  require_records(h);
  PropertyReport r;
  r.name = "mass";
  r.threshold = 1e-12;
  r.measured = -1.0;
  for (const auto& rec : h.records) {
    double drift = std::abs(rec.mass - 1.0);
    if (drift > r.measured) {
      r.measured = drift;
      r.t_worst = rec.t;
    }
  }
  r.status = r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
  r.details = strfmt("max |mass - 1| = %.3e at t = %.6g", r.measured, r.t_worst);
  return r;
}

PropertyReport check_positivity(const RunHistory& h) {
  require_records(h);
  PropertyReport r;
  r.name = "positivity";
  r.threshold = 1e-8;
  r.measured = -std::numeric_limits<double>::infinity();
  for (const auto& rec : h.records) {
    double undershoot = -rec.min_psi;
    if (undershoot > r.measured) {
      r.measured = undershoot;
      r.t_worst = rec.t;
    }
  }
  r.status = r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
  r.details = strfmt("worst min psi = %.3e at t = %.6g", -r.measured, r.t_worst);
  return r;
}

PropertyReport check_phi_bound(const RunHistory& h) {
  require_records(h);
  PropertyReport r;
  r.name = "phi_bound";
  r.threshold = 1e-10;
  r.measured = -std::numeric_limits<double>::infinity();
  for (const auto& rec : h.records) {
    double excess = rec.phi_linf - h.d1v_sup;
    if (excess > r.measured) {
      r.measured = excess;
      r.t_worst = rec.t;
    }
  }
  r.status = r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
  r.details =
      strfmt("max (|phi|_inf - |dV/dx1|_inf) = %.3e at t = %.6g", r.measured, r.t_worst);
  return r;
}

PropertyReport check_f_bound(const RunHistory& h) {
  require_records(h);
  PropertyReport r;
  r.name = "f_bound";
  r.threshold = 0.0;
  r.measured = -std::numeric_limits<double>::infinity();
  for (const auto& rec : h.records) {
    if (rec.floor_used > 0.0)
      raise(ErrorCode::DegenerateMarginal,
            strfmt("marginal fell below the positivity floor at t = %.6g", rec.t));
    double gap = rec.f_l2_norm - rec.propol_c * rec.h_sigma_norm * (1.0 + 1e-9);
    if (gap > r.measured) {
      r.measured = gap;
      r.t_worst = rec.t;
    }
  }
  r.status = r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
  r.details = strfmt("max (|F|_2 - C(t) |psi|_H) = %.3e at t = %.6g", r.measured, r.t_worst);
  return r;
}

PropertyReport check_orbit_bounded(const RunHistory& h) {
  require_records(h);
  PropertyReport r;
  r.name = "orbit_bounded";
  r.threshold = 1.05;
  if (h.aborted) {
    r.status = CheckStatus::Fail;
    r.measured = std::numeric_limits<double>::infinity();
    r.t_worst = h.abort_time;
    r.details = "run aborted: " + h.abort_message;
    return r;
  }
  double T = h.records.back().t;
  if (T < 1.0) raise(ErrorCode::RunTooShort, "plateau check needs at least t_final = 1");
  double early = 0.0, late = 0.0;
  bool have_early = false, have_late = false;
  for (const auto& rec : h.records) {
    if (rec.t <= 0.0) continue;
    if (rec.t <= 0.5 * T) {
      early = std::max(early, rec.h_sigma_norm);
      have_early = true;
    } else if (rec.h_sigma_norm >= late) {
      late = rec.h_sigma_norm;
      r.t_worst = rec.t;
      have_late = true;
    }
  }
  if (!have_early || !have_late)
    raise(ErrorCode::RunTooShort, "history too sparse to split into plateau windows");
  r.measured = late / early;
  r.status = r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
  r.details = strfmt("late/early H-norm ratio = %.6f (late max %.6g at t = %.6g)", r.measured,
                     late, r.t_worst);
  return r;
}

PropertyReport check_marginal_heat(std::span<const RunHistory> ladder) {
  LadderErrors le = ladder_errors(ladder, &SeriesRecord::marginal_heat_err);
  return converging_report("marginal_heat", le, 0.8, 2.2);
}

PropertyReport check_supersolution(std::span<const RunHistory> ladder) {
  for (const auto& h : ladder)
    if (!h.supersolution_enabled)
      raise(ErrorCode::SupersolutionNotEnabled, "run was made without a dominating profile");
  LadderErrors le = ladder_errors(ladder, &SeriesRecord::super_violation);
  return converging_report("supersolution", le, 0.8,
                           std::numeric_limits<double>::infinity());
}

PropertyReport check_formulation_equivalence(std::span<const RunHistory> ladder) {
  LadderErrors le = ladder_errors(ladder, &SeriesRecord::formulation_err);
  return converging_report("formulation_equivalence", le, 0.8,
                           std::numeric_limits<double>::infinity());
}

std::vector<PropertyReport> run_checks(std::span<const std::string> names,
                                       std::span<const RunHistory> ladder) {
  if (ladder.empty()) raise(ErrorCode::EmptyHistory, "no runs to check");
  std::vector<PropertyReport> reports;
  reports.reserve(names.size());
  for (const auto& name : names) {
    if (name == "mass")
      reports.push_back(check_mass(ladder.front()));
    else if (name == "positivity")
      reports.push_back(check_positivity(ladder.front()));
    else if (name == "phi_bound")
      reports.push_back(check_phi_bound(ladder.front()));
    else if (name == "f_bound")
      reports.push_back(check_f_bound(ladder.front()));
    else if (name == "orbit_bounded")
      reports.push_back(check_orbit_bounded(ladder.front()));
    else if (name == "marginal_heat")
      reports.push_back(check_marginal_heat(ladder));
    else if (name == "supersolution")
      reports.push_back(check_supersolution(ladder));
    else if (name == "formulation_equivalence")
      reports.push_back(check_formulation_equivalence(ladder));
    else
      raise(ErrorCode::UnknownKey, "no check named '" + name + "'");
  }
  return reports;
}

}  // namespace fpk
