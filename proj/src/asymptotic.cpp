#include "hetcap/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hetcap/cell.hpp"
#include "hetcap/error.hpp"
#include "hetcap/parallel.hpp"

namespace hetcap {

TwoWell scalar_two_well_min(double a, double b, int d) {
  if (!(a > 0.0) || !(b > 0.0)) throw InputError("two-well weights must be positive");
  if (d < 2) throw InputError("two-well minimum needs d >= 2");
  const double q = std::pow(b / a, 1.0 / (d - 1)) + 1.0;
  return {1.0 / q, b * std::pow(q, 1.0 - d)};
}

double c_lambda(double phi, double chom, double lambda, int d) {
  if (!(phi > 0.0) || !(chom > 0.0)) throw InputError("c_lambda needs positive phi and chom");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in [0,1]");
  if (d < 2) throw InputError("c_lambda needs d >= 2");
  // endpoint limits, exact
  if (lambda == 0.0) return phi;
  if (lambda == 1.0) return chom;
  const double e = 1.0 / (d - 1);
  const double bracket = lambda * std::pow(phi, e) + (1.0 - lambda) * std::pow(chom, e);
  return phi * chom * std::pow(bracket, 1.0 - d);
}

AsymptoticParams AsymptoticParams::make(int d, double eps, double lambda) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0,1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in [0,1]");
  const double delta = lambda == 0.0 ? 1.0 / std::abs(std::log(eps)) : std::pow(eps, lambda);
  return with_delta(d, eps, lambda, std::min(delta, 1.0));
}

AsymptoticParams AsymptoticParams::with_delta(int d, double eps, double lambda, double delta) {
  if (d < 2) throw InputError("d must be >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0,1]");
  return {d, eps, lambda, delta};
}

CenterFamily CenterFamily::realize(const Box& omega, std::span<const double> z, double delta) {
  const int d = omega.dim();
  if (static_cast<int>(z.size()) != d) throw InputError("anchor dimension does not match the box");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  CenterFamily f;
  f.z.assign(z.begin(), z.end());
  f.offset.resize(d);
  f.center.resize(d);
  f.clearance = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) {
    const double mid = 0.5 * (omega.lo[a] + omega.hi[a]);
    f.offset[a] = std::round(mid / delta - z[a]);
    f.center[a] = delta * (z[a] + f.offset[a]);
    f.clearance = std::min({f.clearance, f.center[a] - omega.lo[a], omega.hi[a] - f.center[a]});
  }
  return f;
}

double sandwich_factor(const Box& omega, std::span<const double> center, double eps, int d) {
  double r_in = std::numeric_limits<double>::infinity();
  double far2 = 0.0;
  for (int a = 0; a < omega.dim(); ++a) {
    r_in = std::min({r_in, center[a] - omega.lo[a], omega.hi[a] - center[a]});
    const double w = std::max(center[a] - omega.lo[a], omega.hi[a] - center[a]);
    far2 += w * w;
  }
  const double R_out = std::sqrt(far2);
  const double L = std::abs(std::log(eps));
  if (!(r_in > eps)) throw PreconditionError("inclusion does not fit inside the box");
  const double s = std::min(L / std::log(R_out / eps), std::log(r_in / eps) / L);
  return std::pow(s, d - 1);
}

namespace {

MuResult mu_polar(const Integrand& f, const Box& omega, const CenterFamily& fam, const AsymptoticParams& p,
                  const MuResolution& res) {
  if (p.d != 2) throw InputError("centered polar discretization is two-dimensional");
  if (res.n_angular < 8) throw InputError("need n_angular >= 8");
  double far2 = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double w = std::max(fam.center[a] - omega.lo[a], omega.hi[a] - fam.center[a]);
    far2 += w * w;
  }
  const double R_out = std::sqrt(far2) * (1.0 + 1e-9);
  const double dth = 2.0 * std::numbers::pi / res.n_angular;
  const double L = std::log(R_out / p.eps);
  const int nr = std::max(8, static_cast<int>(std::ceil(L / dth))) + 1;
  GridPtr annulus = build_annulus_grid({fam.center, p.eps, R_out}, nr, res.n_angular, 1.0, 0.0);

  std::vector<std::uint8_t> mask(annulus->num_nodes(), 0);
  std::vector<double> zero(annulus->num_nodes(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const auto x = annulus->node(i);
    for (int a = 0; a < 2; ++a) {
      if (x[a] <= omega.lo[a] || x[a] >= omega.hi[a]) mask[i] = 1;
    }
  }
  GridPtr g = annulus->with_dirichlet(mask, zero);

  EnergyOptions eo;
  eo.delta = p.delta;
  eo.far_field = res.far_field;
  EnergyFunctional E(g, f, eo);

  const auto& radii = g->polar()->radii;
  std::vector<double> u0(g->num_nodes());
  for (int i = 0; i < nr; ++i) {
    const double v = 1.0 - std::log(radii[i] / p.eps) / L;
    for (int j = 0; j < res.n_angular; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * res.n_angular + j;
      u0[k] = g->is_fixed(k) ? g->fixed_value(k) : v;
    }
  }
  MinimizeResult m = minimize_energy(E, DiscreteField(g, std::move(u0)), res.solve);
  MuResult out;
  out.value = m.energy;
  out.nodes = g->num_nodes();
  out.far_cells = E.far_field_cells();
  out.iterations = m.iterations;
  out.converged = m.converged;
  return out;
}

MuResult mu_box(const Integrand& f, const Box& omega, const CenterFamily& fam, const AsymptoticParams& p,
                const MuResolution& res) {
  double h = res.h;
  if (h <= 0.0) h = f.x_independent() ? p.eps / 4.0 : std::min(p.eps / 4.0, p.delta / 8.0);
  if (p.eps < 4.0 * h * (1.0 - 1e-12)) {
    throw ResolutionError("inclusion radius " + std::to_string(p.eps) + " is below 4h with h = " + std::to_string(h));
  }
  GridPtr g = build_masked_box(omega, h, {{fam.center, p.eps, 1.0}}, 0.0);
  EnergyOptions eo;
  eo.delta = p.delta;
  eo.far_field = res.far_field;
  EnergyFunctional E(g, f, eo);
  const double L = std::log(fam.clearance / p.eps);
  DiscreteField u0 = DiscreteField::sample(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < omega.dim(); ++a) r2 += (x[a] - fam.center[a]) * (x[a] - fam.center[a]);
    const double r = std::sqrt(r2);
    return std::clamp(1.0 - std::log(std::max(r, p.eps) / p.eps) / L, 0.0, 1.0);
  });
  MinimizeResult m = minimize_energy(E, u0, res.solve);
  MuResult out;
  out.value = m.energy;
  out.nodes = g->num_nodes();
  out.far_cells = E.far_field_cells();
  out.iterations = m.iterations;
  out.converged = m.converged;
  return out;
}

}  // namespace

MuResult mu_eps_delta(const Integrand& f, const Box& omega, std::span<const double> z, const AsymptoticParams& p,
                      const MuResolution& res) {
  if (f.dim() != p.d || omega.dim() != p.d) throw InputError("dimension mismatch between integrand, box and params");
  CenterFamily fam = CenterFamily::realize(omega, z, p.delta);
  if (!(fam.clearance > p.eps)) {
    throw PreconditionError("realized center is closer than eps to the boundary");
  }
  MuResult out = res.method == MuMethod::CenteredPolar ? mu_polar(f, omega, fam, p, res) : mu_box(f, omega, fam, p, res);
  if (!out.converged) throw NumericalError("mu solve did not converge at eps = " + std::to_string(p.eps));
  out.center = fam.center;
  out.rescaled = std::pow(std::abs(std::log(p.eps)), p.d - 1) * out.value;
  return out;
}

MEpsDelta m_eps_delta(const Integrand& f, const Box& omega, const std::vector<std::vector<double>>& candidates,
                      const AsymptoticParams& p, const MuResolution& res) {
  if (candidates.empty()) throw InputError("candidate list is empty");
  auto values = parallel_map(candidates.size(),
                             [&](std::size_t i) { return mu_eps_delta(f, omega, candidates[i], p, res).value; });
  MEpsDelta out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  out.best_z = candidates[best];
  out.value = values[best];
  out.per_candidate = std::move(values);
  return out;
}

LawConstants estimate_law_constants(const Integrand& f, std::span<const double> z, int n_directions, int cell_n,
                                    const std::vector<double>& schedule, const PolarResolution& res) {
  LawConstants out;
  out.phi = phi_estimate(f, z, schedule, res).estimate;
  Integrand table = tabulate_fhom(f, n_directions, cell_n);
  out.chom = chom_estimate(table, schedule, res).estimate;
  const bool quadratic = f.dim() == 2 && !std::holds_alternative<Integrand::HomogenizedTable>(f.model());
  if (quadratic) {
    const Sym2 A = quadratic_homogenized_matrix(f, cell_n).A;
    const Integrand q = Integrand::quadratic_matrix([A](std::span<const double>) { return A; }, f.bounds(),
                                                    f.name() + "_hom_quadratic");
    out.far_field = q.frozen_at(std::vector<double>{0.0, 0.0});
  } else {
    out.far_field = table;
  }
  out.fhom = std::move(table);
  return out;
}

LawReport law_sweep(const Integrand& f, const Box& omega, std::span<const double> z, double lambda,
                    const std::vector<double>& eps_schedule, const LawConstants& constants, const MuResolution& res) {
  if (eps_schedule.empty()) throw InputError("eps schedule is empty");
  for (std::size_t i = 1; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] < eps_schedule[i - 1])) throw InputError("eps schedule must be decreasing");
  }
  const int d = f.dim();
  LawReport rep;
  rep.lambda = lambda;
  rep.phi = constants.phi;
  rep.chom = constants.chom;
  rep.prediction = c_lambda(constants.phi, constants.chom, lambda, d);

  MuResolution mres = res;
  if (!mres.far_field && constants.far_field) mres.far_field = constants.far_field;
  auto rows = parallel_map(eps_schedule.size(), [&](std::size_t i) {
    const AsymptoticParams p = AsymptoticParams::make(d, eps_schedule[i], lambda);
    const MuResult m = mu_eps_delta(f, omega, z, p, mres);
    LawRow row;
    row.eps = p.eps;
    row.delta = p.delta;
    row.mu = m.value;
    row.rescaled = m.rescaled;
    const double s = sandwich_factor(omega, m.center, p.eps, d);
    row.lower = f.bounds().alpha * sigma(d) * s;
    row.upper = f.bounds().beta * sigma(d) / s;
    row.sandwiched = row.rescaled >= row.lower && row.rescaled <= row.upper;
    return row;
  });
  rep.rows = std::move(rows);
  rep.sandwiched = std::all_of(rep.rows.begin(), rep.rows.end(), [](const LawRow& r) { return r.sandwiched; });
  const double first = std::abs(rep.rows.front().rescaled - rep.prediction);
  const double last = std::abs(rep.rows.back().rescaled - rep.prediction);
  rep.trend = rep.rows.size() >= 2 && last < first;
  rep.pass = rep.sandwiched && rep.trend;
  return rep;
}

}  // namespace hetcap
