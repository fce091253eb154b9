#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fpk/grid.hpp"
#include "fpk/semigroup.hpp"

using namespace fpk;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kInf = std::numeric_limits<double>::infinity();

DensityField fill(const Grid& g, double (*f)(double, double)) {
  DensityField out = make_field(g);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double x0 = g.node(0, g.axis_index(0, i));
    double x1 = g.node(1, g.axis_index(1, i));
    out.values[i] = f(x0, x1);
  }
  return out;
}

DensityField random_field(const Grid& g, unsigned seed, bool zero_mean) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DensityField out = make_field(g);
  for (auto& v : out.values) v = u(rng);
  if (zero_mean) {
    double mean = integrate(out);
    for (auto& v : out.values) v -= mean;
  }
  return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_SUITE("semigroup") {

TEST_CASE("heat flow fixes constants exactly and is the identity at t = 0") {
  Grid g = make_grid(2, {32, 16});
  DensityField one = make_field(g, 1.0);
  DensityField still = heat_propagate(one, 3.0, 1.0);
  for (double v : still.values) CHECK(v == 1.0);

  DensityField f = random_field(g, 3, false);
  DensityField same = heat_propagate(f, 0.0, 1.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(same.values[i] == f.values[i]);
}

TEST_CASE("heat flow damps a product mode by exp(-8 pi^2 t / beta)") {
  Grid g = make_grid(2, {32, 32});
  DensityField f = fill(g, [](double u, double w) {
    return 1.0 + 0.5 * std::cos(kTwoPi * u) * std::cos(kTwoPi * w);
  });
  const double t = 0.25, beta = 2.0;
  DensityField ft = heat_propagate(f, t, beta);
  double damp = std::exp(-8.0 * kPi * kPi * t / beta);  // |k|^2 = 2
  for (std::size_t i = 0; i < ft.values.size(); ++i) {
    double u = g.node(0, g.axis_index(0, i));
    double w = g.node(1, g.axis_index(1, i));
    CHECK(std::abs(ft.values[i] - (1.0 + 0.5 * damp * std::cos(kTwoPi * u) * std::cos(kTwoPi * w))) <=
          1e-14);
  }
}

TEST_CASE("heat flow composes as a semigroup and conserves the integral") {
  Grid g = make_grid(2, {32, 16});
  DensityField f = random_field(g, 11, false);
  DensityField two = heat_propagate(heat_propagate(f, 0.02, 1.5), 0.05, 1.5);
  DensityField one = heat_propagate(f, 0.07, 1.5);
  CHECK(sup_diff(two.values, one.values) <= 1e-13);
  CHECK(std::abs(integrate(one) - integrate(f)) <= 1e-14);
}

TEST_CASE("heat flow contracts Sobolev norms on the mean-zero subspace") {
  Grid g = make_grid(2, {32, 32});
  DensityField f = random_field(g, 19, true);
  for (double sigma : {0.0, 1.5}) {
    double before = sobolev_norm(f, sigma);
    double after = sobolev_norm(heat_propagate(f, 0.01, 1.0), sigma);
    CHECK(after <= before * (1.0 + 1e-12));
    CHECK(after < before);  // strict: every surviving mode is damped
  }
}

TEST_CASE("heat flow validates time and temperature") {
  Grid g = make_grid(2, {16, 16});
  DensityField f = make_field(g, 1.0);
  try {
    heat_propagate(f, -1e-9, 1.0);
    FAIL("expected NegativeTime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeTime);
  }
  try {
    heat_propagate(f, 0.1, -2.0);
    FAIL("expected NonPositiveBeta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveBeta);
  }
}

TEST_CASE("sobolev norm reproduces closed forms") {
  Grid g = make_grid(2, {16, 16});
  CHECK(sobolev_norm(make_field(g, 1.0), 0.0) == 1.0);
  CHECK(sobolev_norm(make_field(g, 1.0), 2.5) == 1.0);  // only the k = 0 mode

  DensityField c = fill(g, [](double u, double) { return std::cos(kTwoPi * u); });
  CHECK(std::abs(sobolev_norm(c, 0.0) - std::sqrt(0.5)) <= 1e-14);
  double w = std::pow(1.0 + 4.0 * kPi * kPi, 0.75);
  CHECK(std::abs(sobolev_norm(c, 1.5) - w * std::sqrt(0.5)) <= 1e-12);
}

TEST_CASE("sobolev norm at sigma = 0 is the L2 norm") {
  Grid g = make_grid(2, {32, 16});
  DensityField f = random_field(g, 29, false);
  CHECK(std::abs(sobolev_norm(f, 0.0) - lp_norm(f, 2.0)) <= 1e-12);
}

TEST_CASE("sobolev norm rejects sigma outside [0, 4]") {
  DensityField f = make_field(make_grid(2, {8, 8}), 1.0);
  for (double sigma : {-0.1, 4.1}) {
    try {
      sobolev_norm(f, sigma);
      FAIL("expected SigmaOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SigmaOutOfRange);
    }
  }
}

TEST_CASE("lp norm reproduces closed forms") {
  Grid g = make_grid(2, {16, 16});
  DensityField one = make_field(g, 1.0);
  for (double p : {1.0, 2.0, 4.0}) CHECK(std::abs(lp_norm(one, p) - 1.0) <= 1e-15);
  CHECK(lp_norm(one, kInf) == 1.0);

  DensityField c = fill(g, [](double u, double) { return std::cos(kTwoPi * u); });
  CHECK(lp_norm(c, kInf) == 1.0);  // the grid contains the peak at u = 0
  CHECK(std::abs(lp_norm(c, 2.0) - std::sqrt(0.5)) <= 1e-14);
  CHECK(std::abs(lp_norm(c, 4.0) - std::pow(3.0 / 8.0, 0.25)) <= 1e-14);

  // p = 1 of a positive field is its integral
  DensityField f = random_field(g, 31, false);
  for (auto& v : f.values) v = std::abs(v) + 0.5;
  CHECK(std::abs(lp_norm(f, 1.0) - integrate(f)) <= 1e-14);
}

TEST_CASE("lp norm rejects p below 1") {
  DensityField f = make_field(make_grid(2, {8, 8}), 1.0);
  try {
    lp_norm(f, 0.5);
    FAIL("expected InvalidP");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidP);
  }
}

TEST_CASE("log_spaced hits both endpoints and increases") {
  auto ts = log_spaced(1e-4, 10.0, 40);
  REQUIRE(ts.size() == 40);
  CHECK(std::abs(ts.front() - 1e-4) <= 1e-15 * 1e-4);
  CHECK(std::abs(ts.back() - 10.0) <= 1e-14 * 10.0);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
}

TEST_CASE("decay estimate at sigma = 0 is exactly 1 from the t -> 0 closure") {
  Grid g = make_grid(2, {32, 32});
  EstimateReport rep = verify_decay_estimate(g, 0.0, 1.0, log_spaced(1e-4, 10.0, 20));
  CHECK(rep.c_sigma == 1.0);
  CHECK(rep.t_at_max == 0.0);
  CHECK(rep.growth == 0.0);
  CHECK(rep.stable);
  // every positive-time sample decays strictly below the closure value
  for (const auto& p : rep.samples) CHECK(p.weighted < 1.0);
}

TEST_CASE("decay estimate at sigma = 1.5 peaks at a finite time and is stable") {
  Grid g = make_grid(2, {64, 64});
  EstimateReport rep = verify_decay_estimate(g, 1.5, 1.0, log_spaced(1e-4, 10.0, 40));
  CHECK(rep.kappa == 2.0 * kPi * kPi);
  CHECK(rep.c_sigma > 0.5);
  CHECK(rep.c_sigma < 0.8);
  CHECK(rep.t_at_max > 0.0);
  CHECK(rep.c_sigma_refined >= rep.c_sigma);  // superset of sample times
  CHECK(rep.growth >= 0.0);
  CHECK(rep.growth < 0.05);
  CHECK(rep.stable);
  REQUIRE(rep.samples.size() == 40);
  // the weight t^{sigma/2} e^{kappa t} still loses to the spectral-gap decay
  CHECK(rep.samples.back().weighted < 1e-50);
}

TEST_CASE("decay estimate is grid-robust once the spectrum is resolved") {
  auto ts = log_spaced(1e-4, 10.0, 40);
  double c64 = verify_decay_estimate(make_grid(2, {64, 64}), 1.5, 1.0, ts).c_sigma;
  double c128 = verify_decay_estimate(make_grid(2, {128, 128}), 1.5, 1.0, ts).c_sigma;
  CHECK(std::abs(c128 - c64) <= 0.05 * c64);
}

TEST_CASE("decay estimate validates its inputs") {
  Grid g = make_grid(2, {16, 16});
  try {
    verify_decay_estimate(g, 4.5, 1.0, {0.1});
    FAIL("expected SigmaOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SigmaOutOfRange);
  }
  try {
    verify_decay_estimate(g, 1.0, 0.0, {0.1});
    FAIL("expected NonPositiveBeta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveBeta);
  }
  try {
    verify_decay_estimate(g, 1.0, 1.0, {0.1, 0.0});
    FAIL("expected NegativeTime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeTime);
  }
}

}  // TEST_SUITE
