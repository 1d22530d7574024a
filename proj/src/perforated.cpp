#include "hetcap/perforated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hetcap/asymptotic.hpp"
#include "hetcap/cell.hpp"
#include "hetcap/error.hpp"
#include "hetcap/modification.hpp"

namespace hetcap {

double critical_period(double eps, int d) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
  if (d < 2) throw InputError("d must be >= 2");
  return std::pow(std::abs(std::log(eps)), (1.0 - d) / d);
}

namespace {

double dist2_to_box(const Box& b, std::span<const double> x) {
  double s = 0.0;
  for (int a = 0; a < b.dim(); ++a) {
    const double q = std::clamp(x[a], b.lo[a], b.hi[a]);
    s += (q - x[a]) * (q - x[a]);
  }
  return s;
}

// Distance to the boundary for points inside the open box, -1 otherwise.
double inside_distance(const Box& b, std::span<const double> x) {
  double m = std::numeric_limits<double>::infinity();
  for (int a = 0; a < b.dim(); ++a) {
    if (!(x[a] > b.lo[a] && x[a] < b.hi[a])) return -1.0;
    m = std::min({m, x[a] - b.lo[a], b.hi[a] - x[a]});
  }
  return m;
}

double norm2(std::span<const double> x, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
  return s;
}

}  // namespace

PerforationLattice build_lattice(const Box& omega, double eps, double lambda, int d) {
  if (omega.dim() != d) throw InputError("box dimension does not match d");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in [0, 1]");
  const double dk = critical_period(eps, d);
  PerforationLattice L;
  L.omega = omega;
  L.d = d;
  L.eps = eps;
  L.lambda = lambda;
  L.period = dk;
  L.delta_requested = AsymptoticParams::make(d, eps, lambda).delta;
  L.m = std::max(2, static_cast<int>(std::ceil(dk / L.delta_requested - 1e-12)));
  L.delta = dk / L.m;

  std::vector<long> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = static_cast<long>(std::ceil((omega.lo[a] - eps) / dk));
    hi[a] = static_cast<long>(std::floor((omega.hi[a] + eps) / dk));
    if (hi[a] < lo[a]) throw DomainTooSmallError("no lattice point near the box");
  }
  std::vector<long> k = lo;
  std::vector<double> x(d);
  bool any_inside = false;
  while (true) {
    for (int a = 0; a < d; ++a) x[a] = static_cast<double>(k[a]) * dk;
    if (dist2_to_box(omega, x) < eps * eps) {
      const double in = inside_distance(omega, x);
      if (in >= 0.0) any_inside = true;
      (in > dk ? L.interior : L.boundary).push_back(L.centers.size());
      L.centers.push_back(x);
    }
    int a = 0;
    while (a < d && ++k[a] > hi[a]) {
      k[a] = lo[a];
      ++a;
    }
    if (a == d) break;
  }
  if (!any_inside) {
    throw DomainTooSmallError("no perforation center lies inside the box at period " + std::to_string(dk));
  }
  return L;
}

double perforation_spacing(const PerforationLattice& lattice, bool x_independent) {
  return x_independent ? lattice.eps / 4.0 : std::min(lattice.eps / 4.0, lattice.delta / 8.0);
}

PerforatedDomain build_perforated_domain(const Box& omega, double eps, double lambda, int d, double h) {
  PerforatedDomain dom;
  dom.lattice = build_lattice(omega, eps, lambda, d);
  dom.h = h > 0.0 ? h : perforation_spacing(dom.lattice, false);
  if (eps < 4.0 * dom.h * (1.0 - 1e-9)) {
    throw ResolutionError("perforation radius " + std::to_string(eps) + " is below 4h with h = " +
                          std::to_string(dom.h));
  }
  std::vector<DirichletBall> balls;
  balls.reserve(dom.lattice.centers.size());
  for (const auto& c : dom.lattice.centers) balls.push_back({c, eps, 0.0});
  dom.grid = build_masked_box(omega, dom.h, balls, std::nullopt);
  return dom;
}

double CapacitaryProfile::value_at(std::span<const double> x) const {
  const double r2 = norm2(x, center);
  if (r2 <= eps * eps) return 0.0;
  if (r2 >= r_out * r_out) return 1.0;
  const PolarLayout& P = *field.grid->polar();
  const double s = std::log(std::sqrt(r2) / eps) / std::log(r_out / eps) * (P.n_radial - 1);
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, P.n_radial - 2);
  const double ts = std::clamp(s - i, 0.0, 1.0);
  double th = std::atan2(x[1] - center[1], x[0] - center[0]);
  if (th < 0.0) th += 2.0 * std::numbers::pi;
  const double q = th / (2.0 * std::numbers::pi) * P.n_angular;
  const int j = static_cast<int>(std::floor(q)) % P.n_angular;
  const int j1 = (j + 1) % P.n_angular;
  const double tt = q - std::floor(q);
  const auto at = [&](int ii, int jj) { return field.values[static_cast<std::size_t>(ii) * P.n_angular + jj]; };
  return (1.0 - ts) * ((1.0 - tt) * at(i, j) + tt * at(i, j1)) + ts * ((1.0 - tt) * at(i + 1, j) + tt * at(i + 1, j1));
}

CapacitaryProfile capacitary_profile(std::span<const double> center, double eps, double r_out, int d,
                                     const PolarResolution& res) {
  if (d != 2) throw InputError("capacitary profiles are gridded in polar form (d = 2)");
  if (static_cast<int>(center.size()) != d) throw InputError("center has wrong dimension");
  if (!(eps > 0.0 && r_out > eps)) throw InputError("profile needs 0 < eps < r_out");
  const double L = std::log(r_out / eps);
  GridPtr g = build_annulus_grid({{center[0], center[1]}, eps, r_out}, res.radial_for(L), res.n_angular, 0.0, 1.0);
  DiscreteField u0 = DiscreteField::sample(g, [&](std::span<const double> x) {
    return std::log(std::sqrt(norm2(x, center)) / eps) / L;
  });
  MinimizeResult m = minimize_energy(g, Integrand::constant(d, 1.0), 1.0, u0, res.solve);
  if (!m.converged) throw NumericalError("capacitary profile solve did not converge");
  CapacitaryProfile p;
  p.center.assign(center.begin(), center.end());
  p.eps = eps;
  p.r_out = r_out;
  p.energy = m.energy;
  p.field = std::move(m.field);
  return p;
}

TargetField TargetField::constant(double c) {
  return {[c](std::span<const double>) { return c; },
          [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); }};
}

TargetField TargetField::coordinate(int axis) {
  if (axis < 0) throw InputError("axis must be >= 0");
  return {[axis](std::span<const double> x) { return x[axis]; },
          [axis](std::span<const double>, std::span<double> g) {
            std::fill(g.begin(), g.end(), 0.0);
            g[axis] = 1.0;
          }};
}

RecoveryResult recovery_sequence(const TargetField& u, const PerforatedDomain& domain, const Integrand& f,
                                 const RecoveryOptions& opts) {
  const PerforationLattice& lat = domain.lattice;
  const int d = lat.d;
  if (f.dim() != d) throw InputError("integrand dimension does not match the lattice");
  if (d != 2) throw InputError("recovery fields use polar boundary-layer profiles (d = 2)");
  // M only feeds the trace modification (N = M >= 2) and the boundary radius r_k
  if (opts.M < 1 || (opts.M < 2 && !lat.interior.empty())) {
    throw ParameterError("M must be >= 2 (>= 1 when there is no interior perforation)");
  }
  const double scale = opts.alpha * std::ldexp(1.0, opts.M + 1);
  if (!(opts.alpha > 0.0) || !(scale < 0.5)) throw ParameterError("need alpha > 0 and alpha 2^{M+1} < 1/2");
  const double dk = lat.period;
  const double inner = opts.alpha * dk;
  if (!(lat.eps < inner)) throw ParameterError("need eps < alpha d_k");

  const Grid& gper = *domain.grid;
  GridPtr g = domain.grid->without_dirichlet();
  const std::size_t nn = g->num_nodes();
  const CartesianLayout& C = *g->cartesian();

  // two-scale field u + delta sum_j d_j u phi_j(x / delta)
  CorrectorSet cs;
  if (!f.x_independent()) cs = CorrectorSet(f, opts.corrector_n, opts.solve);
  std::vector<double> w(nn);
  std::vector<double> grad(d), y(d);
  for (std::size_t i = 0; i < nn; ++i) {
    const auto x = g->node(i);
    w[i] = u.value(x);
    if (!cs.empty()) {
      u.gradient(x, grad);
      for (int a = 0; a < d; ++a) y[a] = x[a] / lat.delta;
      for (int j = 0; j < d; ++j) w[i] += lat.delta * grad[j] * cs.value(j, y);
    }
  }
  const std::vector<double> base = w;

  EnergyOptions eo;
  eo.delta = lat.delta;
  EnergyFunctional E(g, f, eo);

  RecoveryResult res;
  res.r_k = scale * dk;
  res.outer_energy = E.energy(w);
  std::vector<std::pair<std::size_t, double>> balls;  // (center index, radius) where w may differ from base

  const auto index_box = [&](std::span<const double> c, double radius, std::vector<int>& kmin, std::vector<int>& kmax) {
    for (int a = 0; a < d; ++a) {
      kmin[a] = std::max(0, static_cast<int>(std::floor((c[a] - radius - C.lo[a]) / C.h[a])) - 1);
      kmax[a] = std::min(C.counts[a] - 1, static_cast<int>(std::ceil((c[a] + radius - C.lo[a]) / C.h[a])) + 1);
    }
  };
  const auto for_each_node = [&](const std::vector<int>& kmin, const std::vector<int>& kmax, auto&& fn) {
    std::vector<int> k = kmin;
    while (true) {
      std::size_t idx = 0;
      for (int a = 0; a < d; ++a) idx += static_cast<std::size_t>(k[a]) * C.stride[a];
      fn(k, idx);
      int a = 0;
      while (a < d && ++k[a] > kmax[a]) {
        k[a] = kmin[a];
        ++a;
      }
      if (a == d) break;
    }
  };

  for (std::size_t zi : lat.interior) {
    const std::vector<double>& c = lat.centers[zi];
    const ModificationParams p{inner, res.r_k, opts.M, inner};
    ModificationResult mr = modify_to_constant_trace(DiscreteField(g, w), E, p, c);
    w = std::move(mr.field.values);
    balls.emplace_back(zi, mr.outer_radius);
    const double ui = mr.trace_value;
    const double rho_i = mr.ring_radius;

    std::vector<int> kmin(d), kmax(d);
    index_box(c, rho_i, kmin, kmax);
    for_each_node(kmin, kmax, [&](const std::vector<int>&, std::size_t idx) {
      const double r = std::sqrt(norm2(g->node(idx), c));
      if (r >= inner && r < rho_i) w[idx] = ui;
    });

    // local capacitary corrector on B(c, alpha d_k), 0 on the perforation
    index_box(c, inner, kmin, kmax);
    Box sub;
    sub.lo.resize(d);
    sub.hi.resize(d);
    for (int a = 0; a < d; ++a) {
      sub.lo[a] = C.lo[a] + kmin[a] * C.h[a];
      sub.hi[a] = C.lo[a] + kmax[a] * C.h[a];
    }
    GridPtr local = build_masked_box(sub, C.h[0], {}, std::nullopt);
    const CartesianLayout& LC = *local->cartesian();
    for (int a = 0; a < d; ++a) {
      if (LC.counts[a] != kmax[a] - kmin[a] + 1) throw NumericalError("corrector sub-grid is misaligned");
    }
    std::vector<std::size_t> map(local->num_nodes());
    std::vector<std::uint8_t> mask(local->num_nodes(), 0);
    std::vector<double> fixed(local->num_nodes(), 0.0);
    std::vector<double> start(local->num_nodes());
    const double logr = std::log(inner / lat.eps);
    for_each_node(kmin, kmax, [&](const std::vector<int>& k, std::size_t idx) {
      std::size_t li = 0;
      for (int a = 0; a < d; ++a) li += static_cast<std::size_t>(k[a] - kmin[a]) * LC.stride[a];
      map[li] = idx;
      const double r = std::sqrt(norm2(g->node(idx), c));
      if (gper.is_fixed(idx)) {
        mask[li] = 1;
        fixed[li] = 0.0;
      } else if (r >= inner) {
        mask[li] = 1;
        fixed[li] = w[idx];
      }
      start[li] = mask[li] ? fixed[li] : ui * std::clamp(std::log(r / lat.eps) / logr, 0.0, 1.0);
    });
    local = local->with_dirichlet(mask, fixed);
    EnergyFunctional El(local, f, eo);
    MinimizeResult m = minimize_energy(El, DiscreteField(local, std::move(start)), opts.solve);
    if (!m.converged) throw NumericalError("local corrector solve did not converge");
    for (std::size_t li = 0; li < map.size(); ++li) w[map[li]] = m.field.values[li];
    res.corrector_energies.push_back(m.energy);
    res.correction_energy += m.energy;
  }

  if (!lat.boundary.empty()) {
    const std::vector<double> origin(d, 0.0);
    const CapacitaryProfile prof = capacitary_profile(origin, lat.eps, res.r_k, d, opts.profile);
    std::vector<double> rel(d);
    for (std::size_t zi : lat.boundary) {
      const std::vector<double>& c = lat.centers[zi];
      balls.emplace_back(zi, res.r_k);
      std::vector<int> kmin(d), kmax(d);
      index_box(c, res.r_k, kmin, kmax);
      for_each_node(kmin, kmax, [&](const std::vector<int>&, std::size_t idx) {
        const auto x = g->node(idx);
        for (int a = 0; a < d; ++a) rel[a] = x[a] - c[a];
        w[idx] *= prof.value_at(rel);
      });
    }
  }

  const std::vector<double> ce = E.cell_energies(w);
  res.energy = 0.0;
  for (std::size_t cidx = 0; cidx < ce.size(); ++cidx) {
    res.energy += ce[cidx];
    const auto x = g->cell_center(cidx);
    for (std::size_t zi : lat.boundary) {
      if (norm2(x, lat.centers[zi]) < res.r_k * res.r_k) {
        res.boundary_energy += ce[cidx];
        break;
      }
    }
  }

  res.vanishes_on_perforations = true;
  res.local = true;
  for (std::size_t i = 0; i < nn; ++i) {
    if (gper.is_fixed(i) && w[i] != 0.0) res.vanishes_on_perforations = false;
    if (w[i] != base[i]) {
      bool covered = false;
      for (const auto& [zi, radius] : balls) {
        if (norm2(g->node(i), lat.centers[zi]) < radius * radius) {
          covered = true;
          break;
        }
      }
      if (!covered) res.local = false;
    }
  }
  res.field = DiscreteField(g, std::move(w));
  return res;
}

namespace {

constexpr double kGaussX[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGaussW[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// Tensor Gauss rule over n^d cells of a box (d = 2 or 3).
template <class F>
double gauss_integrate(const Box& box, int n, F&& fn) {
  const int d = box.dim();
  if (d < 2 || d > 3) throw InputError("quadrature supports d = 2 and 3");
  std::vector<double> h(d);
  for (int a = 0; a < d; ++a) h[a] = (box.hi[a] - box.lo[a]) / n;
  const int q = d == 2 ? 9 : 27;
  const long cells = d == 2 ? static_cast<long>(n) * n : static_cast<long>(n) * n * n;
  std::vector<double> x(d);
  double total = 0.0;
  for (long c = 0; c < cells; ++c) {
    long rem = c;
    std::vector<long> k(d);
    for (int a = 0; a < d; ++a) {
      k[a] = rem % n;
      rem /= n;
    }
    for (int p = 0; p < q; ++p) {
      int pr = p;
      double wgt = 1.0;
      for (int a = 0; a < d; ++a) {
        const int g = pr % 3;
        pr /= 3;
        x[a] = box.lo[a] + (k[a] + 0.5 + 0.5 * kGaussX[g]) * h[a];
        wgt *= 0.5 * kGaussW[g] * h[a];
      }
      total += wgt * fn(std::span<const double>(x));
    }
  }
  return total;
}

}  // namespace

GammaLimitEnergy gamma_limit_energy(const TargetField& u, const Integrand& fhom, double c_lambda_value,
                                    const Box& omega, int n) {
  const int d = omega.dim();
  if (fhom.dim() != d) throw InputError("integrand dimension does not match the box");
  if (n < 1) throw InputError("quadrature needs n >= 1");
  if (!(c_lambda_value >= 0.0)) throw InputError("strange-term constant must be >= 0");
  std::vector<double> g(d);
  const std::vector<double> y(d, 0.0);
  GammaLimitEnergy out;
  out.bulk = gauss_integrate(omega, n, [&](std::span<const double> x) {
    u.gradient(x, g);
    return fhom.evaluate(fhom.x_independent() ? std::span<const double>(y) : x, g);
  });
  out.strange = c_lambda_value * gauss_integrate(omega, n, [&](std::span<const double> x) {
                  return std::pow(std::abs(u.value(x)), d);
                });
  out.total = out.bulk + out.strange;
  return out;
}

StrangeTermReport strange_term_experiment(const TargetField& u, const Integrand& f, double lambda,
                                          const std::vector<double>& eps_schedule, const Box& omega,
                                          const StrangeTermOptions& opts) {
  if (eps_schedule.empty()) throw InputError("eps schedule is empty");
  for (std::size_t i = 1; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] < eps_schedule[i - 1])) throw InputError("eps schedule must be decreasing");
  }
  const int d = f.dim();
  StrangeTermReport rep;
  rep.lambda = lambda;

  Integrand fhom = opts.fhom ? *opts.fhom : (f.x_independent() ? f : tabulate_fhom(f, 64, 32));
  if (opts.c_lambda_value) {
    rep.c_lambda_value = *opts.c_lambda_value;
  } else {
    const std::vector<double> z(d, 0.0);
    const double phi = phi_estimate(f, z, default_schedule()).estimate;
    const double chom = f.x_independent() ? phi : chom_estimate(fhom, default_schedule()).estimate;
    rep.c_lambda_value = c_lambda(phi, chom, lambda, d);
  }
  const double gamma = gamma_limit_energy(u, fhom, rep.c_lambda_value, omega).total;

  for (double eps : eps_schedule) {
    StrangeTermRow row;
    const PerforationLattice lat = build_lattice(omega, eps, lambda, d);
    const double h = opts.h > 0.0 ? opts.h : perforation_spacing(lat, f.x_independent());
    const PerforatedDomain dom = build_perforated_domain(omega, eps, lambda, d, h);
    const RecoveryResult r = recovery_sequence(u, dom, f, opts.recovery);
    row.eps = eps;
    row.period = lat.period;
    row.delta_requested = lat.delta_requested;
    row.delta = lat.delta;
    row.interior = lat.interior.size();
    row.boundary = lat.boundary.size();
    row.recovery_energy = r.energy;
    row.per_area = r.energy / omega.measure();
    row.gamma_energy = gamma;
    row.gap = std::abs(r.energy - gamma);
    row.relative_gap = gamma > 0.0 ? row.gap / gamma : (row.gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    row.boundary_share = r.energy > 0.0 ? r.boundary_energy / r.energy : 0.0;
    row.vanishes = r.vanishes_on_perforations;
    rep.rows.push_back(row);
  }

  rep.gap_decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].gap > rep.rows[i - 1].gap) rep.gap_decreasing = false;
  }
  rep.final_within_tolerance = rep.rows.back().relative_gap <= opts.tolerance;
  rep.vanishes = std::all_of(rep.rows.begin(), rep.rows.end(), [](const StrangeTermRow& r) { return r.vanishes; });
  rep.pass = rep.gap_decreasing && rep.final_within_tolerance && rep.vanishes;
  return rep;
}

namespace {

// Index into lattice.interior of the cube containing x, or -1.
long interior_cube(const PerforationLattice& lat, std::span<const double> x,
                   const std::vector<std::vector<long>>& keys) {
  std::vector<long> k(lat.d);
  for (int a = 0; a < lat.d; ++a) k[a] = std::lround(x[a] / lat.period);
  const auto it = std::lower_bound(keys.begin(), keys.end(), k);
  if (it == keys.end() || *it != k) return -1;
  return static_cast<long>(it - keys.begin());
}

struct CubeIndex {
  std::vector<std::vector<long>> keys;  // sorted lattice indices of interior centers
  std::vector<std::size_t> order;       // position in lattice.interior for each key
};

CubeIndex cube_index(const PerforationLattice& lat) {
  std::vector<std::pair<std::vector<long>, std::size_t>> tmp;
  for (std::size_t i = 0; i < lat.interior.size(); ++i) {
    std::vector<long> k(lat.d);
    for (int a = 0; a < lat.d; ++a) k[a] = std::lround(lat.centers[lat.interior[i]][a] / lat.period);
    tmp.emplace_back(std::move(k), i);
  }
  std::sort(tmp.begin(), tmp.end());
  CubeIndex ci;
  for (auto& [k, i] : tmp) {
    ci.keys.push_back(std::move(k));
    ci.order.push_back(i);
  }
  return ci;
}

}  // namespace

CubeProjection piecewise_mean_projection(const DiscreteField& u, const PerforationLattice& lat) {
  const Grid& g = *u.grid;
  if (g.dim() != lat.d) throw InputError("field dimension does not match the lattice");
  const CubeIndex ci = cube_index(lat);
  const int d = lat.d;
  std::vector<double> mass(lat.interior.size(), 0.0), integral(lat.interior.size(), 0.0);
  std::vector<double> cv(g.num_cells());
  std::vector<long> owner(g.num_cells());
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    double s = 0.0;
    for (auto k : g.cell_corners(c)) s += u.values[k];
    cv[c] = s / g.corners_per_cell();
    const long pos = interior_cube(lat, g.cell_center(c), ci.keys);
    owner[c] = pos < 0 ? -1 : static_cast<long>(ci.order[pos]);
    if (owner[c] >= 0) {
      mass[owner[c]] += g.cell(c).measure;
      integral[owner[c]] += g.cell(c).measure * cv[c];
    }
  }
  CubeProjection out;
  out.means.resize(lat.interior.size());
  for (std::size_t i = 0; i < out.means.size(); ++i) out.means[i] = mass[i] > 0.0 ? integral[i] / mass[i] : 0.0;
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const double step = owner[c] >= 0 ? std::pow(std::abs(out.means[owner[c]]), d) : 0.0;
    out.ld_error += g.cell(c).measure * std::abs(step - std::pow(std::abs(cv[c]), d));
  }
  return out;
}

CubeProjection piecewise_mean_projection(const TargetField& u, const PerforationLattice& lat, int n) {
  const int d = lat.d;
  const CubeIndex ci = cube_index(lat);
  CubeProjection out;
  out.means.resize(lat.interior.size());
  const double vol = std::pow(lat.period, d);
  const int sub = std::max(4, n / 16);
  for (std::size_t i = 0; i < lat.interior.size(); ++i) {
    Box q;
    for (int a = 0; a < d; ++a) {
      q.lo.push_back(lat.centers[lat.interior[i]][a] - 0.5 * lat.period);
      q.hi.push_back(lat.centers[lat.interior[i]][a] + 0.5 * lat.period);
    }
    out.means[i] = gauss_integrate(q, sub, [&](std::span<const double> x) { return u.value(x); }) / vol;
  }
  out.ld_error = gauss_integrate(lat.omega, n, [&](std::span<const double> x) {
    const long pos = interior_cube(lat, x, ci.keys);
    const double step = pos < 0 ? 0.0 : std::pow(std::abs(out.means[ci.order[pos]]), d);
    return std::abs(step - std::pow(std::abs(u.value(x)), d));
  });
  return out;
}

}  // namespace hetcap
