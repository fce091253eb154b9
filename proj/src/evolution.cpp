#include "fpk/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/semigroup.hpp"
#include "fpk/util.hpp"

namespace fpk {

namespace {

bool all_finite(const std::vector<double>& xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_fresh_bias(const DensityField& psi, const BiasState& bias) {
  if (bias.source_tag != field_tag(psi))
    raise(ErrorCode::InconsistentBias, "bias state was not derived from this density");
}

// phi(x1) broadcast against the full field.
DensityField bias_flux(const DensityField& psi, const BiasState& bias) {
  DensityField out;
  out.grid = psi.grid;
  out.values.resize(psi.values.size());
  const std::size_t slice = psi.grid.stride(0);
  const std::size_t total = psi.values.size();
#pragma omp parallel for schedule(static) num_threads(detail::pointwise_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(total); ++i)
    out.values[i] = bias.phi.values[std::size_t(i) / slice] * psi.values[i];
  return out;
}

DensityField nodal_product(const DensityField& a, const DensityField& b) {
  DensityField out;
  out.grid = a.grid;
  out.values.resize(a.values.size());
  const std::size_t total = a.values.size();
#pragma omp parallel for schedule(static) num_threads(detail::pointwise_threads())
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(total); ++i)
    out.values[i] = a.values[i] * b.values[i];
  return out;
}

}  // namespace

SolverState make_state(DensityField psi0, double beta, const PotentialFields& pot, double floor) {
  if (beta <= 0.0) raise(ErrorCode::NonPositiveBeta, "beta must be positive");
  SolverState s;
  s.t = 0.0;
  s.beta = beta;
  s.bias = conditional_force(psi0, pot, floor);
  s.psi = std::move(psi0);
  return s;
}

DensityField drift_term(const DensityField& psi, const PotentialFields& pot,
                        const BiasState& bias, bool conservative) {
  if (pot.v.grid != psi.grid) raise(ErrorCode::GridMismatch, "potential grid differs");
  require_fresh_bias(psi, bias);

  DensityField fb = bias_flux(psi, bias);

  if (conservative) {
    SpectralCoeffs acc = forward_transform(nodal_product(pot.grad[0], psi));
    apply_derivative(acc, 0, 1);
    for (int a = 1; a < psi.grid.n; ++a) {
      SpectralCoeffs c = forward_transform(nodal_product(pot.grad[a], psi));
      apply_derivative(c, a, 1);
      for (std::size_t i = 0; i < acc.coeffs.size(); ++i) acc.coeffs[i] += c.coeffs[i];
    }
    SpectralCoeffs cb = forward_transform(fb);
    apply_derivative(cb, 0, 1);
    for (std::size_t i = 0; i < acc.coeffs.size(); ++i) acc.coeffs[i] -= cb.coeffs[i];
    return inverse_transform(acc);
  }

  // expanded form: grad V . grad psi + (Lap V) psi - d/dx1 (phi psi)
  SpectralCoeffs cpsi = forward_transform(psi);
  DensityField out = make_field(psi.grid);
  for (int a = 0; a < psi.grid.n; ++a) {
    SpectralCoeffs ca = cpsi;
    apply_derivative(ca, a, 1);
    DensityField da = inverse_transform(ca);
    for (std::size_t i = 0; i < out.values.size(); ++i)
      out.values[i] += pot.grad[a].values[i] * da.values[i];
  }
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] += pot.lap.values[i] * psi.values[i];
  DensityField dfb = spectral_derivative(fb, 0, 1);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= dfb.values[i];
  return out;
}

SolverState step_imex(const SolverState& s, const StepControl& ctl, const PotentialFields& pot) {
  require_fresh_bias(s.psi, s.bias);
  DensityField f = drift_term(s.psi, pot, s.bias, ctl.conservative_form);

  DensityField mid = s.psi;
  const std::size_t total = mid.values.size();
  for (std::size_t i = 0; i < total; ++i) mid.values[i] += ctl.dt * f.values[i];

  DensityField next = heat_propagate(mid, ctl.dt, s.beta);
  if (!all_finite(next.values))
    raise(ErrorCode::NonFinite, "density became non-finite at t = " + std::to_string(s.t + ctl.dt));

  SolverState out;
  out.t = s.t + ctl.dt;
  out.beta = s.beta;
  out.bias = conditional_force(next, pot, ctl.domain_floor);
  out.psi = std::move(next);
  out.supersolution = s.supersolution;
  out.last_step_dt = ctl.dt;
  out.last_step_iterations = 0;
  return out;
}

SolverState step_picard(const SolverState& s, const StepControl& ctl, const PotentialFields& pot) {
  require_fresh_bias(s.psi, s.bias);
  constexpr double kDtMin = 1e-10;

  double dt = ctl.dt;
  std::vector<double> diffs;
  for (;;) {
    diffs.clear();
    DensityField base = heat_propagate(s.psi, dt, s.beta);
    DensityField iterate = base;
    bool converged = false;
    int iters = 0;

    for (int m = 1; m <= ctl.picard_max_iter; ++m) {
      BiasState bias_m = conditional_force(iterate, pot, ctl.domain_floor);
      DensityField f = drift_term(iterate, pot, bias_m, ctl.conservative_form);
      DensityField half = heat_propagate(f, 0.5 * dt, s.beta);

      DensityField next;
      next.grid = base.grid;
      next.values.resize(base.values.size());
      double diff = 0.0;
      for (std::size_t i = 0; i < next.values.size(); ++i) {
        next.values[i] = base.values[i] + dt * half.values[i];
        double d = std::abs(next.values[i] - iterate.values[i]);
        if (!std::isfinite(d)) {
          diff = HUGE_VAL;
          break;
        }
        if (d > diff) diff = d;
      }
      diffs.push_back(diff);
      iterate = std::move(next);
      iters = m;
      if (diff < ctl.picard_tol) {
        converged = true;
        break;
      }
      if (diff == HUGE_VAL) break;  // blown up, no point iterating further
    }

    if (converged) {
      if (!all_finite(iterate.values))
        raise(ErrorCode::NonFinite, "density became non-finite at t = " + std::to_string(s.t + dt));
      SolverState out;
      out.t = s.t + dt;
      out.beta = s.beta;
      out.bias = conditional_force(iterate, pot, ctl.domain_floor);
      out.psi = std::move(iterate);
      out.supersolution = s.supersolution;
      out.last_step_dt = dt;
      out.last_step_iterations = iters;
      out.last_picard_diffs = std::move(diffs);
      return out;
    }

    dt *= 0.5;  // no contraction at this step size, retry on the halved window
    if (dt < kDtMin)
      raise(ErrorCode::NoContraction,
            "fixed-point iteration failed to contract above dt = " + std::to_string(kDtMin));
  }
}

MarginalField step_supersolution(const SolverState& s, double delta, double dt) {
  if (!s.supersolution)
    raise(ErrorCode::SupersolutionNotEnabled, "state carries no dominating profile");
  const MarginalField& m = *s.supersolution;

  MarginalField flux;
  flux.grid = m.grid;
  flux.values.resize(m.values.size());
  for (std::size_t j = 0; j < m.values.size(); ++j)
    flux.values[j] = s.bias.phi.values[j] * m.values[j];
  MarginalField dflux = spectral_derivative(flux, 0, 1);

  MarginalField mid;
  mid.grid = m.grid;
  mid.values.resize(m.values.size());
  for (std::size_t j = 0; j < m.values.size(); ++j)
    mid.values[j] = m.values[j] + dt * (-delta * m.values[j] - dflux.values[j]);

  return evolve_denominator(mid, dt, s.beta);
}

namespace {

struct RecordContext {
  const PotentialFields* pot;
  const PotentialNorms* norms;
  const StepControl* ctl;
  const MarginalField* marg0;
  const MarginalField* tilde;
  const DensityField* exp_half;  // e^{beta V / 2}
  double beta;
};

SeriesRecord make_record(const SolverState& s, const RecordContext& cx) {
  SeriesRecord r;
  r.t = s.t;
  r.mass = integrate(s.psi);

  double mn = HUGE_VAL, mx = 0.0;
  for (double v : s.psi.values) {
    mn = std::min(mn, v);
    mx = std::max(mx, std::abs(v));
  }
  r.min_psi = mn;
  r.linf_psi = mx;
  r.h_sigma_norm = sobolev_norm(s.psi, 1.5);
  r.l4_norm = lp_norm(s.psi, 4.0);

  DensityField f = drift_term(s.psi, *cx.pot, s.bias, cx.ctl->conservative_form);
  r.f_l2_norm = lp_norm(f, 2.0);

  for (double v : s.bias.phi.values) r.phi_linf = std::max(r.phi_linf, std::abs(v));
  r.floor_used = s.bias.floor_used;

  // explicit drift bound C(t); the marginal is clamped away from zero only
  // for the logarithm, mirroring the force's own floor
  double min_marg = HUGE_VAL;
  for (double v : s.bias.marginal.values) min_marg = std::min(min_marg, v);
  double clamp = cx.ctl->domain_floor > 0.0 ? cx.ctl->domain_floor : 1e-300;
  MarginalField logm;
  logm.grid = s.bias.marginal.grid;
  logm.values.resize(s.bias.marginal.values.size());
  for (std::size_t j = 0; j < logm.values.size(); ++j)
    logm.values[j] = std::log(std::max(s.bias.marginal.values[j], clamp));
  MarginalField dlog = spectral_derivative(logm, 0, 1);
  double dlog_sup = 0.0;
  for (double v : dlog.values) dlog_sup = std::max(dlog_sup, std::abs(v));
  r.propol_c = cx.norms->sum4() + cx.norms->d1_sup * r.linf_psi / std::max(min_marg, clamp) +
               cx.norms->d1_sup * dlog_sup;

  if (s.supersolution) {
    const std::size_t slice = s.psi.grid.stride(0);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.psi.values.size(); ++i) {
      double lhs = s.psi.values[i] * cx.exp_half->values[i];
      double gap = lhs - s.supersolution->values[i / slice];
      if (gap > worst) worst = gap;
    }
    r.super_violation = worst;
  }

  MarginalField ref = evolve_denominator(*cx.marg0, s.t, cx.beta);
  for (std::size_t j = 0; j < ref.values.size(); ++j) {
    r.marginal_heat_err =
        std::max(r.marginal_heat_err, std::abs(s.bias.marginal.values[j] - ref.values[j]));
    r.formulation_err =
        std::max(r.formulation_err, std::abs(cx.tilde->values[j] - s.bias.marginal.values[j]));
  }
  return r;
}

long long step_count(double t_final, double dt) {
  if (t_final <= 0.0) return 0;
  return std::llround(std::ceil(t_final / dt - 1e-9));
}

}  // namespace

namespace {

void run_impl(const RunConfig& cfg, const SnapshotSink& sink, RunHistory& hist) {
  Grid g = make_grid(cfg.dim, cfg.grid_sizes);
  PotentialFields pot = eval_fields(cfg.potential, g);
  PotentialNorms norms = sup_norms(cfg.potential, g);

  StepControl ctl;
  ctl.dt = cfg.dt;
  ctl.scheme = cfg.scheme;
  ctl.picard_tol = cfg.picard_tol;
  ctl.picard_max_iter = cfg.picard_max_iter;
  ctl.conservative_form = cfg.conservative_form;
  ctl.domain_floor = cfg.domain_floor;

  hist.d1v_sup = norms.d1_sup;

  SolverState state = make_state(build_initial(cfg), cfg.beta, pot, ctl.domain_floor);

  MarginalField marg0 = state.bias.marginal;
  MarginalField tilde = marg0;

  DensityField exp_half = make_field(g);
  double delta = 0.0;
  if (cfg.supersolution) {
    for (std::size_t i = 0; i < exp_half.values.size(); ++i)
      exp_half.values[i] = std::exp(0.5 * cfg.beta * pot.v.values[i]);
    delta = compute_delta(cfg.potential, g, cfg.beta);
    hist.delta = delta;

    // slice-wise sup of psi e^{beta V/2}
    MarginalField m0;
    m0.grid = marg0.grid;
    m0.values.assign(std::size_t(g.sizes[0]), 0.0);
    const std::size_t slice = g.stride(0);
    for (std::size_t i = 0; i < state.psi.values.size(); ++i) {
      double v = state.psi.values[i] * exp_half.values[i];
      std::size_t j = i / slice;
      if (v > m0.values[j]) m0.values[j] = v;
    }
    state.supersolution = std::move(m0);
  }

  RecordContext cx{&pot, &norms, &ctl, &marg0, &tilde, &exp_half, cfg.beta};

  const long long nsteps = step_count(cfg.t_final, cfg.dt);
  hist.records.push_back(make_record(state, cx));
  if (cfg.snapshot_every > 0) {
    if (sink)
      sink(0, state.t, state.psi);
    else
      hist.snapshots.emplace_back(0, state.psi);
  }

  bool uniform_t = true;
  for (long long step = 1; step <= nsteps; ++step) {
    try {
      SolverState next =
          cfg.scheme == Scheme::Imex ? step_imex(state, ctl, pot) : step_picard(state, ctl, pot);
      double dt_used = next.last_step_dt;
      if (state.supersolution) next.supersolution = step_supersolution(state, delta, dt_used);
      tilde = evolve_denominator(tilde, dt_used, cfg.beta);
      if (dt_used != cfg.dt) uniform_t = false;
      state = std::move(next);
      if (uniform_t) state.t = double(step) * cfg.dt;
    } catch (const Error& e) {
      hist.aborted = true;
      hist.abort_code = e.code();
      hist.abort_time = state.t;
      hist.abort_message = e.what();
      break;
    }

    if (step % cfg.series_every == 0 || step == nsteps)
      hist.records.push_back(make_record(state, cx));
    if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
      if (sink)
        sink(step, state.t, state.psi);
      else
        hist.snapshots.emplace_back(step, state.psi);
    }
  }

  hist.final_psi = std::move(state.psi);
}

}  // namespace

RunHistory run(const RunConfig& cfg, const SnapshotSink& sink) {
  RunHistory hist;
  hist.dt = cfg.dt;
  hist.beta = cfg.beta;
  hist.t_final = cfg.t_final;
  hist.scheme = cfg.scheme;
  hist.conservative = cfg.conservative_form;
  hist.supersolution_enabled = cfg.supersolution;
  try {
    run_impl(cfg, sink, hist);
  } catch (const Error& e) {
    // setup failures (bad initial data, domain exit at t = 0) land here;
    // per-step failures were already captured by the loop
    hist.aborted = true;
    hist.abort_code = e.code();
    hist.abort_time = 0.0;
    hist.abort_message = e.what();
  }
  return hist;
}

}  // namespace fpk
