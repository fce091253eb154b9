#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fpk/bias.hpp"
#include "fpk/config.hpp"
#include "fpk/evolution.hpp"
#include "fpk/grid.hpp"
#include "fpk/potential.hpp"
#include "fpk/semigroup.hpp"

using namespace fpk;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

DensityField fill(const Grid& g, double (*f)(double, double)) {
  DensityField out = make_field(g);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double x0 = g.node(0, g.axis_index(0, i));
    double x1 = g.node(1, g.axis_index(1, i));
    out.values[i] = f(x0, x1);
  }
  return out;
}

DensityField random_positive(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.8);
  DensityField out = make_field(g);
  for (auto& v : out.values) v = u(rng);
  return out;
}

// low modes only, so nodal products stay below the Nyquist band
DensityField band_limited(const Grid& g) {
  return fill(g, [](double u, double w) {
    return 1.0 + 0.3 * std::cos(kTwoPi * u) * std::cos(kTwoPi * w) + 0.1 * std::cos(2.0 * kTwoPi * u) +
           0.05 * std::sin(kTwoPi * w);
  });
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double sup_abs(const std::vector<double>& a) {
  double worst = 0.0;
  for (double v : a) worst = std::max(worst, std::abs(v));
  return worst;
}

StepControl control(double dt, Scheme scheme = Scheme::Imex) {
  StepControl ctl;
  ctl.dt = dt;
  ctl.scheme = scheme;
  return ctl;
}

RunConfig base_config() {
  RunConfig c;
  c.dim = 2;
  c.grid_sizes = {16, 16};
  c.beta = 1.0;
  c.potential = PotentialSpec::zero();
  c.dt = 1e-3;
  c.t_final = 0.01;
  c.supersolution = false;
  return c;
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("make_state derives a fresh bias and validates beta") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(random_positive(g, 3), 1.5, pot, 1e-12);
  CHECK(s.t == 0.0);
  CHECK(s.beta == 1.5);
  CHECK(s.bias.source_tag == field_tag(s.psi));
  CHECK_FALSE(s.supersolution.has_value());

  try {
    make_state(make_field(g, 1.0), 0.0, pot, 0.0);
    FAIL("expected NonPositiveBeta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveBeta);
  }
}

TEST_CASE("drift vanishes bitwise for a flat potential") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::zero(), g);
  SolverState s = make_state(random_positive(g, 7), 1.0, pot, 0.0);
  for (bool conservative : {true, false}) {
    DensityField f = drift_term(s.psi, pot, s.bias, conservative);
    for (double v : f.values) CHECK(v == 0.0);
  }
}

TEST_CASE("x1-only potentials produce zero drift for any density") {
  // phi equals dV/dx1 on every slice, so the biased flux cancels the
  // potential flux identically: the dynamics reduces to pure diffusion
  Grid g = make_grid(2, {32, 16});
  PotentialFields pot = eval_fields(PotentialSpec::cosine1d(1.0), g);
  SolverState s = make_state(random_positive(g, 11), 1.0, pot, 0.0);
  DensityField f = drift_term(s.psi, pot, s.bias, true);
  CHECK(sup_abs(f.values) <= 1e-11);
}

TEST_CASE("conservative drift integrates to zero") {
  Grid g = make_grid(2, {32, 32});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(random_positive(g, 13), 1.0, pot, 0.0);
  DensityField f = drift_term(s.psi, pot, s.bias, true);
  CHECK(std::abs(integrate(f)) <= 1e-13);
}

TEST_CASE("conservative and expanded drift agree below the Nyquist band") {
  Grid g = make_grid(2, {32, 32});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(band_limited(g), 1.0, pot, 0.0);
  DensityField fc = drift_term(s.psi, pot, s.bias, true);
  DensityField fe = drift_term(s.psi, pot, s.bias, false);
  CHECK(sup_diff(fc.values, fe.values) <= 1e-10);
}

TEST_CASE("drift refuses a stale bias and a foreign grid") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(random_positive(g, 17), 1.0, pot, 0.0);
  s.psi.values[0] += 0.5;  // stale: bias still tags the old density
  try {
    drift_term(s.psi, pot, s.bias, true);
    FAIL("expected InconsistentBias");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentBias);
  }

  SolverState ok = make_state(random_positive(g, 17), 1.0, pot, 0.0);
  PotentialFields other = eval_fields(PotentialSpec::coupled(1.0, 0.5), make_grid(2, {32, 32}));
  try {
    drift_term(ok.psi, other, ok.bias, true);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("imex step reduces to the exact heat flow when the drift vanishes") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::zero(), g);
  DensityField psi0 = random_positive(g, 19);
  SolverState s = make_state(psi0, 1.0, pot, 1e-12);
  SolverState next = step_imex(s, control(0.01), pot);
  DensityField expect = heat_propagate(psi0, 0.01, 1.0);
  for (std::size_t i = 0; i < expect.values.size(); ++i)
    CHECK(next.psi.values[i] == expect.values[i]);
}

TEST_CASE("uniform density is stationary under an x1-only potential") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::cosine1d(1.0), g);
  StepControl ctl = control(1e-2);
  SolverState s = make_state(make_field(g, 1.0), 1.0, pot, 1e-12);
  for (int k = 0; k < 100; ++k) s = step_imex(s, ctl, pot);
  CHECK(s.t == doctest::Approx(1.0));
  for (double v : s.psi.values) CHECK(std::abs(v - 1.0) <= 1e-13);

  SolverState p = make_state(make_field(g, 1.0), 1.0, pot, 1e-12);
  StepControl pctl = control(1e-2, Scheme::Picard);
  p = step_picard(p, pctl, pot);
  CHECK(p.last_step_iterations == 1);  // first iterate is already a fixed point
  for (double v : p.psi.values) CHECK(std::abs(v - 1.0) <= 1e-14);
}

TEST_CASE("imex conserves mass in conservative form") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  DensityField psi0 = band_limited(g);
  double m0 = integrate(psi0);
  for (double& v : psi0.values) v /= m0;
  SolverState s = make_state(psi0, 1.0, pot, 1e-12);
  StepControl ctl = control(1e-3);
  for (int k = 0; k < 50; ++k) s = step_imex(s, ctl, pot);
  CHECK(std::abs(integrate(s.psi) - 1.0) <= 1e-12);
}

TEST_CASE("picard with zero drift converges in one bitwise-exact iteration") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::zero(), g);
  DensityField psi0 = random_positive(g, 23);
  SolverState s = make_state(psi0, 1.0, pot, 1e-12);
  SolverState next = step_picard(s, control(0.01, Scheme::Picard), pot);
  CHECK(next.last_step_iterations == 1);
  CHECK(next.last_step_dt == 0.01);
  REQUIRE(next.last_picard_diffs.size() == 1);
  CHECK(next.last_picard_diffs[0] == 0.0);
  DensityField expect = heat_propagate(psi0, 0.01, 1.0);
  for (std::size_t i = 0; i < expect.values.size(); ++i)
    CHECK(next.psi.values[i] == expect.values[i]);
}

TEST_CASE("picard iteration contracts on a coupled potential") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(band_limited(g), 1.0, pot, 1e-12);
  StepControl ctl = control(1e-2, Scheme::Picard);
  SolverState next = step_picard(s, ctl, pot);
  CHECK(next.last_step_dt == 1e-2);  // no halving needed
  REQUIRE(next.last_picard_diffs.size() >= 2);
  for (std::size_t m = 1; m < next.last_picard_diffs.size(); ++m)
    CHECK(next.last_picard_diffs[m] < next.last_picard_diffs[m - 1]);
  CHECK(next.last_picard_diffs.back() < ctl.picard_tol);
}

TEST_CASE("picard halves the window until the iteration contracts") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(band_limited(g), 1.0, pot, 1e-12);
  StepControl ctl = control(1e-2, Scheme::Picard);
  ctl.picard_max_iter = 1;  // force convergence within a single iteration
  ctl.picard_tol = 5e-4;
  SolverState next = step_picard(s, ctl, pot);
  CHECK(next.last_step_dt < ctl.dt);
  CHECK(next.last_step_dt >= 1e-10);
  CHECK(next.last_picard_diffs.back() < ctl.picard_tol);
  CHECK(next.t == doctest::Approx(next.last_step_dt));
}

TEST_CASE("picard reports NoContraction when no window can satisfy the tolerance") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::coupled(1.0, 0.5), g);
  SolverState s = make_state(band_limited(g), 1.0, pot, 1e-12);
  StepControl ctl = control(1e-2, Scheme::Picard);
  ctl.picard_max_iter = 2;
  ctl.picard_tol = 1e-300;  // unattainable
  try {
    step_picard(s, ctl, pot);
    FAIL("expected NoContraction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoContraction);
  }
}

TEST_CASE("supersolution step matches the pure 1-D heat flow when phi vanishes") {
  Grid g = make_grid(2, {16, 16});
  PotentialFields pot = eval_fields(PotentialSpec::zero(), g);
  SolverState s = make_state(random_positive(g, 29), 2.0, pot, 1e-12);

  MarginalField m;
  m.grid = make_grid(1, {16});
  m.values.resize(16);
  for (int j = 0; j < 16; ++j) m.values[j] = 1.0 + 0.3 * std::cos(kTwoPi * m.grid.node(0, j));
  s.supersolution = m;

  MarginalField stepped = step_supersolution(s, 0.0, 0.05);
  MarginalField expect = evolve_denominator(m, 0.05, 2.0);
  for (int j = 0; j < 16; ++j) CHECK(stepped.values[j] == expect.values[j]);

  SolverState bare = make_state(random_positive(g, 29), 2.0, pot, 1e-12);
  try {
    step_supersolution(bare, 0.0, 0.05);
    FAIL("expected SupersolutionNotEnabled");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupersolutionNotEnabled);
  }
}

TEST_CASE("run with t_final = 0 records the initial state only") {
  RunConfig cfg = base_config();
  cfg.t_final = 0.0;
  RunHistory h = run(cfg);
  CHECK_FALSE(h.aborted);
  REQUIRE(h.records.size() == 1);
  CHECK(h.records[0].t == 0.0);
  CHECK(h.records[0].mass == 1.0);
  CHECK(h.final_psi.values == std::vector<double>(16 * 16, 1.0));
}

TEST_CASE("run reproduces the exact heat decay of a cosine perturbation") {
  RunConfig cfg = base_config();
  cfg.initial = InitialKind::CosinePerturbed;
  cfg.initial_amplitude = 0.5;
  cfg.t_final = 0.1;
  cfg.series_every = 100;

  for (Scheme scheme : {Scheme::Imex, Scheme::Picard}) {
    cfg.scheme = scheme;
    RunHistory h = run(cfg);
    REQUIRE_FALSE(h.aborted);
    Grid g = make_grid(2, {16, 16});
    double damp = std::exp(-8.0 * kPi * kPi * 0.1);
    DensityField expect = fill(g, [](double u, double w) {
      return 0.5 * std::cos(kTwoPi * u) * std::cos(kTwoPi * w);
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < expect.values.size(); ++i)
      worst = std::max(worst,
                       std::abs(h.final_psi.values[i] - (1.0 + damp * expect.values[i])));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("run honours the series cadence and keeps exact step times") {
  RunConfig cfg = base_config();
  cfg.series_every = 2;
  RunHistory h = run(cfg);  // 10 steps of 1e-3
  REQUIRE_FALSE(h.aborted);
  REQUIRE(h.records.size() == 6);  // steps 0, 2, 4, 6, 8, 10
  CHECK(h.records[1].t == 2.0 * cfg.dt);
  CHECK(h.records[5].t == 10.0 * cfg.dt);
  CHECK(h.dt == cfg.dt);
  CHECK(h.beta == cfg.beta);
  CHECK(h.t_final == cfg.t_final);
  CHECK(h.scheme == cfg.scheme);
  CHECK(h.conservative == cfg.conservative_form);
  CHECK(h.supersolution_enabled == cfg.supersolution);
}

TEST_CASE("run emits snapshots through the sink or into the history") {
  RunConfig cfg = base_config();
  cfg.potential = PotentialSpec::coupled(0.5, 0.3);
  cfg.initial = InitialKind::CosinePerturbed;
  cfg.snapshot_every = 5;

  RunHistory keep = run(cfg);
  REQUIRE_FALSE(keep.aborted);
  REQUIRE(keep.snapshots.size() == 3);
  CHECK(keep.snapshots[0].first == 0);
  CHECK(keep.snapshots[1].first == 5);
  CHECK(keep.snapshots[2].first == 10);

  std::vector<std::pair<long long, DensityField>> sunk;
  RunHistory piped = run(cfg, [&](long long step, double, const DensityField& f) {
    sunk.emplace_back(step, f);
  });
  REQUIRE_FALSE(piped.aborted);
  CHECK(piped.snapshots.empty());
  REQUIRE(sunk.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(sunk[k].first == keep.snapshots[k].first);
    // identical trajectories: the two runs must agree bit for bit
    CHECK(sunk[k].second.values == keep.snapshots[k].second.values);
  }
}

TEST_CASE("run computes the supersolution inputs and starts with zero violation") {
  RunConfig cfg = base_config();
  cfg.potential = PotentialSpec::cosine1d(1.0);
  cfg.supersolution = true;
  cfg.t_final = 0.05;
  RunHistory h = run(cfg);
  REQUIRE_FALSE(h.aborted);
  CHECK(std::abs(h.d1v_sup - kTwoPi) <= 1e-12);  // grid contains the extremum
  CHECK(h.delta == doctest::Approx(-24.5204).epsilon(1e-3));
  CHECK(h.records[0].super_violation == 0.0);  // barrier built as the slice sup
  for (const auto& rec : h.records) CHECK(rec.super_violation <= 1e-12);
}

TEST_CASE("imex converges to the picard solution at first order in dt") {
  RunConfig cfg = base_config();
  cfg.potential = PotentialSpec::coupled(0.3, 0.2);
  cfg.initial = InitialKind::CosinePerturbed;
  cfg.initial_amplitude = 0.3;
  cfg.t_final = 0.1;
  cfg.series_every = 1000;

  auto final_at = [&](Scheme scheme, double dt) {
    cfg.scheme = scheme;
    cfg.dt = dt;
    RunHistory h = run(cfg);
    REQUIRE_FALSE(h.aborted);
    return h.final_psi;
  };

  double gap_coarse =
      sup_diff(final_at(Scheme::Imex, 2e-3).values, final_at(Scheme::Picard, 2e-3).values);
  double gap_fine =
      sup_diff(final_at(Scheme::Imex, 1e-3).values, final_at(Scheme::Picard, 1e-3).values);
  CHECK(gap_coarse > 0.0);
  double ratio = gap_coarse / gap_fine;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.6);
}

TEST_CASE("run records a mid-trajectory failure instead of throwing") {
  // weak diffusion: the explicit drift update drives a marginal negative
  // after several stable steps
  RunConfig cfg = base_config();
  cfg.potential = PotentialSpec::coupled(5.0, 2.0);
  cfg.initial = InitialKind::GibbsLike;
  cfg.beta = 10.0;
  cfg.dt = 0.05;
  cfg.t_final = 2.0;
  cfg.domain_floor = 0.0;  // negative marginals abort instead of flooring
  RunHistory h = run(cfg);
  CHECK(h.aborted);
  CHECK(h.abort_code == ErrorCode::DomainViolation);
  CHECK(h.abort_time > 0.0);
  CHECK(h.abort_time < cfg.t_final);
  CHECK(h.records.size() > 1);  // the healthy prefix is preserved
  CHECK_FALSE(h.abort_message.empty());
  CHECK_FALSE(h.final_psi.values.empty());
}

TEST_CASE("run records a stepper refusal the same way") {
  RunConfig cfg = base_config();
  cfg.potential = PotentialSpec::coupled(1.0, 0.5);
  cfg.initial = InitialKind::CosinePerturbed;
  cfg.dt = 0.01;
  cfg.t_final = 1.0;
  cfg.scheme = Scheme::Picard;
  cfg.picard_tol = 1e-300;  // unattainable: every window fails to contract
  cfg.picard_max_iter = 2;
  RunHistory h = run(cfg);
  CHECK(h.aborted);
  CHECK(h.abort_code == ErrorCode::NoContraction);
  CHECK(h.abort_time == 0.0);
  CHECK(h.records.size() == 1);
}

}  // TEST_SUITE
