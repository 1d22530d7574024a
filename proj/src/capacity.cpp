#include "hetcap/capacity.hpp"

#include <cmath>
#include <numbers>

#include "hetcap/error.hpp"
#include "hetcap/parallel.hpp"

namespace hetcap {

double sigma(int d) {
  if (d < 2) throw InputError("sigma needs d >= 2");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double analytic_capacity(int d, double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw InputError("analytic capacity needs 0 < r < R");
  return sigma(d) * std::pow(std::log(R / r), 1.0 - d);
}

int PolarResolution::radial_for(double log_ratio) const {
  return std::max(min_radial, static_cast<int>(std::ceil(per_log_radius * log_ratio - 1e-9))) + 1;
}

PolarResolution PolarResolution::refined(int factor) const {
  PolarResolution out = *this;
  out.per_log_radius *= factor;
  out.n_angular *= factor;
  out.min_radial *= factor;
  return out;
}

AnnulusMinimum annulus_minimum(const Integrand& f, double r, double R, const PolarResolution& res) {
  if (f.dim() != 2) throw InputError("annulus minima are computed on polar grids (d = 2)");
  if (!f.x_independent()) throw InputError("annulus minimum needs an x-independent integrand");
  if (!(r > 0.0) || !(R > r)) throw InputError("annulus needs 0 < r < R");
  const double L = std::log(R / r);
  const int nr = res.radial_for(L);
  GridPtr g = build_annulus_grid({{0.0, 0.0}, r, R}, nr, res.n_angular);
  // warm start: the homogeneous log profile
  const auto& radii = g->polar()->radii;
  std::vector<double> u0(g->num_nodes());
  for (int i = 0; i < nr; ++i) {
    const double v = i == 0 ? 1.0 : (i == nr - 1 ? 0.0 : 1.0 - std::log(radii[i] / r) / L);
    for (int j = 0; j < res.n_angular; ++j) u0[static_cast<std::size_t>(i) * res.n_angular + j] = v;
  }
  EnergyFunctional E(g, f);
  MinimizeResult m = minimize_energy(E, DiscreteField(g, std::move(u0)), res.solve);
  return {m.energy, m.iterations, m.converged, nr, res.n_angular};
}

AnnulusMinimum frozen_annulus_minimum(const FrozenIntegrand& f, double R, const PolarResolution& res) {
  if (!(R > 1.0)) throw InputError("frozen annulus minimum needs R > 1");
  return annulus_minimum(f.as_integrand(), 1.0, R, res);
}

LogExtrapolation fit_log_model(std::vector<LogSample> samples, int d, double residual_threshold) {
  (void)d;
  if (samples.size() < 2) throw InputError("log extrapolation needs at least 2 samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].R > samples[i - 1].R)) throw InputError("R schedule must be strictly increasing");
  }
  const double n = static_cast<double>(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    const double x = 1.0 / std::log(s.R);
    sx += x;
    sy += s.rescaled;
    sxx += x * x;
    sxy += x * s.rescaled;
  }
  const double den = n * sxx - sx * sx;
  LogExtrapolation out;
  if (std::abs(den) <= 1e-300) {
    out.estimate = sy / n;
  } else {
    out.slope = (n * sxy - sx * sy) / den;
    out.estimate = (sy - out.slope * sx) / n;
  }
  double ss = 0.0;
  for (const auto& s : samples) {
    const double e = s.rescaled - (out.estimate + out.slope / std::log(s.R));
    ss += e * e;
  }
  out.residual = std::sqrt(ss / n);
  if (!std::isfinite(out.estimate) || !(out.estimate > 0.0)) {
    throw NumericalError("log extrapolation produced a non-positive limit");
  }
  out.low_confidence = out.residual > residual_threshold * out.estimate;
  out.samples = std::move(samples);
  return out;
}

std::vector<double> default_schedule() { return {std::exp(2.0), std::exp(3.0), std::exp(4.0)}; }

namespace {

LogExtrapolation estimate_limit(const Integrand& f, const std::vector<double>& schedule, const PolarResolution& res) {
  if (schedule.size() < 2) throw InputError("schedule needs at least 2 radii");
  for (double R : schedule) {
    if (!(R > 1.0)) throw InputError("schedule radii must exceed 1");
  }
  const int d = f.dim();
  auto mins = parallel_map(schedule.size(), [&](std::size_t i) { return annulus_minimum(f, 1.0, schedule[i], res); });
  std::vector<LogSample> samples;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!mins[i].converged) throw NumericalError("annulus solve did not converge at R = " + std::to_string(schedule[i]));
    const double L = std::log(schedule[i]);
    samples.push_back({schedule[i], mins[i].value, std::pow(L, d - 1) * mins[i].value});
  }
  return fit_log_model(std::move(samples), d);
}

}  // namespace

LogExtrapolation phi_estimate(const Integrand& f, std::span<const double> z, const std::vector<double>& schedule,
                              const PolarResolution& res) {
  return estimate_limit(f.frozen_at(z), schedule, res);
}

LogExtrapolation chom_estimate(const Integrand& fhom, const std::vector<double>& schedule,
                               const PolarResolution& res) {
  if (!fhom.x_independent()) throw InputError("chom_estimate expects an x-independent homogenized integrand");
  return estimate_limit(fhom, schedule, res);
}

double log_profile_upper_bound(const FrozenIntegrand& f, double R, int n_angles) {
  if (!(R > 1.0)) throw InputError("log profile bound needs R > 1");
  const int d = f.dim();
  const Density dens = f.as_integrand().density_at(std::vector<double>(d, 0.0));
  double sphere_integral = 0.0;
  if (dens.kind == Density::Kind::Power) {
    sphere_integral = dens.c * sigma(d);
  } else {
    if (d != 2) throw InputError("angular quadrature is implemented for d = 2");
    if (n_angles < 8) throw InputError("need at least 8 angles");
    // trapezoid rule on the circle: spectrally accurate for smooth densities
    const double dth = 2.0 * std::numbers::pi / n_angles;
    for (int k = 0; k < n_angles; ++k) {
      const double th = dth * (k + 0.5);
      const double xi[2] = {-std::cos(th), -std::sin(th)};
      sphere_integral += dens.value(xi) * dth;
    }
  }
  return sphere_integral * std::pow(std::log(R), 1.0 - d);
}

}  // namespace hetcap
