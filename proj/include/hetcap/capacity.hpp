#pragma once

#include <vector>

#include "hetcap/grid.hpp"
#include "hetcap/integrand.hpp"
#include "hetcap/minimize.hpp"

namespace hetcap {

/// Surface measure of the unit sphere in R^d.
double sigma(int d);

/// d-capacity of B(0,r) in B(0,R) for |xi|^d: sigma(d) log(R/r)^{1-d}.
double analytic_capacity(int d, double r, double R);

/// Polar resolution preset. Rings are spaced so that each unit of log radius
/// gets per_log_radius cells (at least min_radial rings overall).
struct PolarResolution {
  int per_log_radius = 32;
  int n_angular = 128;
  int min_radial = 16;
  SolveOptions solve{};

  int radial_for(double log_ratio) const;
  PolarResolution refined(int factor = 2) const;
};

struct AnnulusMinimum {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_radial = 0;
  int n_angular = 0;
};

/// Minimum of sum f(grad u) over the annulus r < |x| < R (d = 2), u = 1 inside
/// and 0 outside. The integrand must not depend on x.
AnnulusMinimum annulus_minimum(const Integrand& f, double r, double R, const PolarResolution& res = {});

/// Same with f(z, .) on 1 < |x| < R.
AnnulusMinimum frozen_annulus_minimum(const FrozenIntegrand& f, double R, const PolarResolution& res = {});

struct LogSample {
  double R = 0.0;
  double minimum = 0.0;
  double rescaled = 0.0;  // (log R)^{d-1} * minimum
};

/// Fit rescaled = estimate + slope / log R by least squares.
struct LogExtrapolation {
  std::vector<LogSample> samples;
  double estimate = 0.0;
  double slope = 0.0;
  double residual = 0.0;  // root-mean-square misfit
  bool low_confidence = false;
};

LogExtrapolation fit_log_model(std::vector<LogSample> samples, int d, double residual_threshold = 1e-2);

/// Default schedule {e^2, e^3, e^4}.
std::vector<double> default_schedule();

LogExtrapolation phi_estimate(const Integrand& f, std::span<const double> z, const std::vector<double>& schedule,
                              const PolarResolution& res = {});
LogExtrapolation chom_estimate(const Integrand& fhom, const std::vector<double>& schedule,
                               const PolarResolution& res = {});

/// Energy of u = 1 - log|x| / log R on 1 < |x| < R for f(z, .), by angular
/// quadrature of the closed radial integral.
double log_profile_upper_bound(const FrozenIntegrand& f, double R, int n_angles = 4096);

}  // namespace hetcap
