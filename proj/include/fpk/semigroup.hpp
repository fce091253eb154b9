#pragma once

#include <vector>

#include "fpk/grid.hpp"

namespace fpk {

/// Applies the multiplier exp(-t * 4 pi^2 |k|^2 / beta) in place.
void apply_heat_multiplier(SpectralCoeffs& c, double t, double beta);

/// Exact heat flow over time t with diffusion coefficient 1/beta.
/// The mean (mode 0) is untouched; t = 0 returns the input unchanged.
DensityField heat_propagate(const DensityField& f, double t, double beta);

/// Bessel-potential norm sqrt( sum_k (1 + 4 pi^2 |k|^2)^sigma |c_k|^2 )
/// for sigma in [0, 4].  sigma = 0 coincides with the L2 norm.
double sobolev_norm(const DensityField& f, double sigma);

/// Rectangle-rule L^p norm, p >= 1; p = infinity gives the nodal sup.
double lp_norm(const DensityField& f, double p);

struct EstimatePoint {
  double t = 0.0;
  double opnorm = 0.0;    // sup_{k != 0} (1 + 4 pi^2 |k|^2)^{sigma/2} e^{-t 4 pi^2 |k|^2 / beta}
  double weighted = 0.0;  // opnorm * t^{sigma/2} * e^{kappa t}
};

/// Empirical smoothing constant of the mean-zero heat semigroup: the decay
/// bound opnorm(t) <= C * t^{-sigma/2} * e^{-kappa t} with kappa fixed at
/// half the spectral gap, measured over a set of sample times.  c_sigma is
/// the sup of the weighted samples including the t -> 0 closure point
/// (1 for sigma = 0, 0 otherwise).  Stability is judged by re-measuring on
/// a log-midpoint refinement of the sample set.
struct EstimateReport {
  double sigma = 0.0;
  double beta = 0.0;
  double kappa = 0.0;
  double c_sigma = 0.0;
  double t_at_max = 0.0;
  double c_sigma_refined = 0.0;
  double growth = 0.0;  // c_sigma_refined / c_sigma - 1
  bool stable = false;  // growth below 5%
  std::vector<EstimatePoint> samples;
};

EstimateReport verify_decay_estimate(const Grid& g, double sigma, double beta,
                                     const std::vector<double>& t_samples);

/// count log-spaced points on [t_min, t_max].
std::vector<double> log_spaced(double t_min, double t_max, int count);

}  // namespace fpk
