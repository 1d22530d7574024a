#include "hetcap/modification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hetcap/error.hpp"
#include "hetcap/parallel.hpp"

namespace hetcap {

int ModificationParams::S() const {
  if (!(eta > 0.0) || !(R >= eta)) return -1;
  int s = static_cast<int>(std::floor(std::log2(R / eta)));
  // guard the floor against rounding on exact powers of two
  while (eta * std::ldexp(1.0, s + 1) <= R) ++s;
  while (s >= 0 && eta * std::ldexp(1.0, s) > R) --s;
  return s;
}

void ModificationParams::validate() const {
  if (!(eta > 0.0) || !(r > 0.0) || !(R > r)) throw ParameterError("modification needs eta > 0 and 0 < r < R");
  const int s = S();
  if (s < 3) throw ParameterError("modification needs S >= 3, got S = " + std::to_string(s));
  if (N < 2 || N >= s) throw ParameterError("modification needs 2 <= N < S");
  if (r > eta * std::ldexp(1.0, s - N)) throw ParameterError("modification needs r <= eta 2^{S-N}");
}

double DyadicCutoff::operator()(double rho) const {
  if (rho <= inner || rho >= outer) return 0.0;
  if (rho <= peak) return (rho - inner) / inner;
  return (outer - rho) / peak;
}

DyadicCutoff dyadic_cutoff(int k, const ModificationParams& p) {
  p.validate();
  if (k < 1 || k > p.N - 1) throw ParameterError("cutoff index must lie in 1..N-1");
  const int e = p.S() - p.N + k;
  return {p.eta * std::ldexp(1.0, e - 1), p.eta * std::ldexp(1.0, e), p.eta * std::ldexp(1.0, e + 1)};
}

namespace {

std::vector<double> radii_from(const Grid& g, std::span<const double> z) {
  std::vector<double> rho(g.num_nodes());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto x = g.node(i);
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += (x[a] - z[a]) * (x[a] - z[a]);
    rho[i] = std::sqrt(s);
  }
  return rho;
}

// Nodes representing the sphere of radius target: the nearest polar ring, or
// the shell of half-width h/2 on Cartesian grids.
std::vector<std::uint32_t> ring_nodes(const Grid& g, const std::vector<double>& rho, double target,
                                      bool polar_centered) {
  std::vector<std::uint32_t> out;
  if (polar_centered) {
    const PolarLayout& P = *g.polar();
    int best = 0;
    for (int i = 1; i < P.n_radial; ++i) {
      if (std::abs(std::log(P.radii[i] / target)) < std::abs(std::log(P.radii[best] / target))) best = i;
    }
    for (int j = 0; j < P.n_angular; ++j) out.push_back(static_cast<std::uint32_t>(best * P.n_angular + j));
    return out;
  }
  double h = 0.0;
  for (double v : g.cartesian()->h) h = std::max(h, v);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (std::abs(rho[i] - target) <= 0.5 * h) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

double cell_value(const Grid& g, std::size_t c, std::span<const double> u) {
  double s = 0.0;
  const auto corners = g.cell_corners(c);
  for (auto k : corners) s += u[k];
  return s / static_cast<double>(corners.size());
}

}  // namespace

ModificationResult modify_to_constant_trace(const DiscreteField& u, const Integrand& f, double delta,
                                            const ModificationParams& p, std::span<const double> center) {
  EnergyOptions eo;
  eo.delta = delta;
  EnergyFunctional E(u.grid, f, eo);
  return modify_to_constant_trace(u, E, p, center);
}

ModificationResult modify_to_constant_trace(const DiscreteField& u, const EnergyFunctional& E,
                                            const ModificationParams& p, std::span<const double> center) {
  p.validate();
  const Grid& g = *u.grid;
  if (&E.grid() != &g) throw InputError("energy functional lives on another grid");
  std::vector<double> z;
  bool polar_centered = false;
  if (center.empty()) {
    if (!g.polar()) throw InputError("a center is required for non-polar grids");
    z = g.polar()->center;
    polar_centered = true;
  } else {
    if (static_cast<int>(center.size()) != g.dim()) throw InputError("center has wrong dimension");
    z.assign(center.begin(), center.end());
    if (g.polar()) {
      const auto& c = g.polar()->center;
      polar_centered = std::equal(c.begin(), c.end(), z.begin());
    }
  }

  const std::vector<double> rho = radii_from(g, z);
  std::vector<double> cell_rho(g.num_cells());
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const auto x = g.cell_center(c);
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += (x[a] - z[a]) * (x[a] - z[a]);
    cell_rho[c] = std::sqrt(s);
  }

  ModificationResult res;
  res.energy_before = E.energy(u.values);
  const int N = p.N;
  res.delta_energy.assign(N - 1, 0.0);
  std::vector<std::vector<double>> candidates(N - 1);
  std::vector<double> means(N - 1);
  std::vector<std::vector<std::uint32_t>> rings(N - 1);

  for (int j = 1; j <= N - 1; ++j) {
    const int k = N - j;
    const DyadicCutoff cut = dyadic_cutoff(k, p);
    std::vector<std::uint32_t> ring = ring_nodes(g, rho, cut.peak, polar_centered);
    if (ring.empty()) throw ParameterError("no grid nodes near the dyadic ring of radius " + std::to_string(cut.peak));
    for (auto i : ring) {
      if (!(rho[i] > cut.inner && rho[i] < cut.outer)) {
        throw ParameterError("annulus too thin for the dyadic structure at radius " + std::to_string(cut.peak));
      }
    }

    std::vector<double> phi(g.num_nodes());
    // nodes within roundoff of the annulus edge count as outside, so v == u there exactly
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi[i] = cut(rho[i]);
      if (phi[i] < 1e-12) phi[i] = 0.0;
    }
    for (auto i : ring) phi[i] = 1.0;

    double mass = 0.0;
    double integral = 0.0;
    std::vector<std::uint32_t> touched;
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
      if (cell_rho[c] > cut.inner && cell_rho[c] < cut.outer) {
        const double m = g.cell(c).measure;
        mass += m;
        integral += m * cell_value(g, c, u.values);
      }
      for (auto node : g.cell_corners(c)) {
        if (phi[node] > 0.0) {
          touched.push_back(static_cast<std::uint32_t>(c));
          break;
        }
      }
    }
    if (!(mass > 0.0)) throw ParameterError("dyadic annulus contains no grid cells");
    const double mean = integral / mass;

    std::vector<double> v = u.values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (phi[i] == 0.0) continue;
      v[i] = phi[i] == 1.0 ? mean : (1.0 - phi[i]) * u.values[i] + phi[i] * mean;
    }
    res.delta_energy[j - 1] = E.energy_on(v, touched) - E.energy_on(u.values, touched);
    candidates[j - 1] = std::move(v);
    means[j - 1] = mean;
    rings[j - 1] = std::move(ring);
  }

  int best = 1;
  for (int j = 2; j <= N - 1; ++j) {
    if (res.delta_energy[j - 1] < res.delta_energy[best - 1]) best = j;
  }
  const DyadicCutoff cut = dyadic_cutoff(N - best, p);
  res.chosen_j = best;
  res.trace_value = means[best - 1];
  res.ring_nodes = std::move(rings[best - 1]);
  res.ring_radius = cut.peak;
  res.inner_radius = cut.inner;
  res.outer_radius = cut.outer;
  res.field = DiscreteField(u.grid, std::move(candidates[best - 1]));
  res.energy_after = E.energy(res.field.values);
  res.energy_ratio = res.energy_before > 0.0 ? res.energy_after / res.energy_before : 1.0;
  return res;
}

DiscreteField random_annulus_field(GridPtr g, std::uint64_t seed, int modes) {
  const PolarLayout* P = g->polar();
  if (!P) throw InputError("random annulus fields need a polar grid");
  if (modes < 1) throw InputError("need at least one mode");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int M = modes;
  std::vector<double> ca((M + 1) * (M + 1)), cb((M + 1) * (M + 1));
  for (int m = 0; m <= M; ++m) {
    for (int q = 0; q <= M; ++q) {
      const double w = 1.0 / ((1.0 + m + q) * (1.0 + m + q));
      ca[m * (M + 1) + q] = w * normal(rng);
      cb[m * (M + 1) + q] = w * normal(rng);
    }
  }
  const double l0 = std::log(P->radii.front());
  const double l1 = std::log(P->radii.back());
  std::vector<double> v(g->num_nodes());
  std::vector<double> T(M + 1);
  for (int i = 0; i < P->n_radial; ++i) {
    const double s = 2.0 * (std::log(P->radii[i]) - l0) / (l1 - l0) - 1.0;
    T[0] = 1.0;
    if (M >= 1) T[1] = s;
    for (int q = 2; q <= M; ++q) T[q] = 2.0 * s * T[q - 1] - T[q - 2];
    for (int j = 0; j < P->n_angular; ++j) {
      const double th = 2.0 * std::numbers::pi * j / P->n_angular;
      double val = 0.0;
      for (int m = 0; m <= M; ++m) {
        const double cm = std::cos(m * th);
        const double sm = std::sin(m * th);
        for (int q = 0; q <= M; ++q) val += (ca[m * (M + 1) + q] * cm + cb[m * (M + 1) + q] * sm) * T[q];
      }
      v[static_cast<std::size_t>(i) * P->n_angular + j] = val;
    }
  }
  return DiscreteField(std::move(g), std::move(v));
}

double poincare_ratio(const DiscreteField& u) {
  const Grid& g = *u.grid;
  const int d = g.dim();
  double mass = 0.0;
  double integral = 0.0;
  std::vector<double> cv(g.num_cells());
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    cv[c] = cell_value(g, c, u.values);
    mass += g.cell(c).measure;
    integral += g.cell(c).measure * cv[c];
  }
  const double mean = integral / mass;
  double num = 0.0;
  for (std::size_t c = 0; c < g.num_cells(); ++c) num += g.cell(c).measure * std::pow(std::abs(cv[c] - mean), d);
  const double den = EnergyFunctional(u.grid, Integrand::constant(d, 1.0)).energy(u.values);
  if (!(den > 0.0)) return 0.0;
  return num / den;
}

PoincareEstimate poincare_wirtinger_lower_estimate(int d, int n_samples, int n_radial, int n_angular,
                                                   std::uint64_t seed) {
  if (d != 2) throw InputError("the reference annulus is gridded in polar form (d = 2)");
  if (n_samples < 0) throw InputError("n_samples must be >= 0");
  GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, 4.0}, n_radial, n_angular)->without_dirichlet();
  PoincareEstimate out;
  DiscreteField x1 = DiscreteField::sample(g, [](std::span<const double> x) { return x[0]; });
  out.x1_ratio = poincare_ratio(x1);
  out.estimate = out.x1_ratio;
  auto ratios = parallel_map(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    return poincare_ratio(random_annulus_field(g, seed * 0x9E3779B97F4A7C15ull + i + 1));
  });
  for (double r : ratios) out.estimate = std::max(out.estimate, r);
  out.samples = n_samples + 1;
  return out;
}

}  // namespace hetcap
