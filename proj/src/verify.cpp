#include "hetcap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hetcap/asymptotic.hpp"
#include "hetcap/capacity.hpp"
#include "hetcap/cell.hpp"
#include "hetcap/integrand.hpp"
#include "hetcap/minimize.hpp"
#include "hetcap/modification.hpp"
#include "hetcap/perforated.hpp"

namespace hetcap {

int SuiteReport::passed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; }));
}

int SuiteReport::failed() const { return static_cast<int>(checks.size()) - passed(); }

namespace {

EnergyOptions at_delta(double delta) {
  EnergyOptions o;
  o.delta = delta;
  return o;
}

void at_most(SuiteReport& rep, std::string name, double value, double limit) {
  rep.checks.push_back({std::move(name), value <= limit, value, limit});
}

void at_least(SuiteReport& rep, std::string name, double value, double limit) {
  rep.checks.push_back({std::move(name), value >= limit, value, limit});
}

void axioms(SuiteReport& rep, int n, std::uint64_t seed) {
  for (const std::string& name : presets::names()) {
    const AxiomReport a = verify_axioms(presets::by_name(name, 2, 1.0), n, seed);
    const double worst = std::max(a.max_periodicity_defect, a.max_homogeneity_defect) +
                         static_cast<double>(a.growth_violations + a.convexity_violations);
    at_most(rep, "axioms." + name, worst, 1e-10);
  }
  const Integrand wrong = Integrand::scalar_coefficient(
      2, [](std::span<const double> y) { return 2.0 + std::sin(2.0 * std::numbers::pi * y[0]); }, {2.0, 3.0},
      "wrong_bounds");
  at_least(rep, "axioms.detects_wrong_bounds", verify_axioms(wrong, n, seed).growth_violations, 1.0);
}

void closed_forms(SuiteReport& rep, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.5, 20.0), lam(0.0, 1.0);
  double endpoint = 0.0, homog = 0.0, outside = 0.0, well = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = 2 + i % 2;
    const double phi = pos(rng), C = pos(rng), l = lam(rng), t = pos(rng);
    endpoint = std::max({endpoint, std::abs(c_lambda(phi, C, 0.0, d) - phi) / phi,
                         std::abs(c_lambda(phi, C, 1.0, d) - C) / C});
    const double v = c_lambda(phi, C, l, d);
    homog = std::max(homog, std::abs(c_lambda(t * phi, t * C, l, d) - t * v) / (t * v));
    outside = std::max({outside, std::min(phi, C) - v, v - std::max(phi, C)});
  }
  // brute force over x in [0, 1] with step 1e-5 on a few weight pairs
  for (int i = 0; i < std::max(1, n / 50); ++i) {
    const int d = 2 + i % 2;
    const double a = pos(rng), b = pos(rng);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100000; ++k) {
      const double x = k * 1e-5;
      best = std::min(best, a * std::pow(1.0 - x, d) + b * std::pow(x, d));
    }
    well = std::max(well, std::abs(scalar_two_well_min(a, b, d).value - best) / best);
  }
  at_most(rep, "c_lambda.endpoints", endpoint, 0.0);
  at_most(rep, "c_lambda.homogeneity", homog, 1e-13);
  at_most(rep, "c_lambda.between_phi_and_chom", outside, 1e-12);
  at_most(rep, "two_well.brute_force", well, 1e-8);
}

void grids(SuiteReport& rep) {
  const double r = 0.5, R = 3.0;
  GridPtr a = build_annulus_grid({{0.0, 0.0}, r, R}, 40, 64);
  const double exact = std::numbers::pi * (R * R - r * r);
  at_most(rep, "grid.annulus_measure", std::abs(a->total_measure() - exact) / exact, 1e-12);
  const Box box{{0.0, -1.0}, {2.0, 0.5}};
  GridPtr b = build_masked_box(box, 0.05, {{{1.0, 0.0}, 0.2, 1.0}}, 0.0);
  at_most(rep, "grid.box_measure", std::abs(b->total_measure() - box.measure()) / box.measure(), 1e-12);
  DiscreteField u = DiscreteField::feasible(b, 0.5);
  at_most(rep, "grid.feasible_field", u.satisfies_constraints(0.0) ? 0.0 : 1.0, 0.0);
}

void energies(SuiteReport& rep, int n, std::uint64_t seed) {
  GridPtr g = build_masked_box(Box::unit(2), 1.0 / 32, {}, std::nullopt);
  const Integrand f = presets::sinusoidal(2);
  const EnergyFunctional E(g, f, at_delta(0.25));
  const EnergyFunctional E1(g, Integrand::constant(2, 1.0));
  std::mt19937_64 rng(seed ^ 0x5A5A5A5Aull);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < std::max(1, n / 20); ++s) {
    std::vector<double> v(g->num_nodes());
    for (double& x : v) x = normal(rng);
    const double e = E.energy(v), e1 = E1.energy(v);
    worst = std::max({worst, f.bounds().alpha * e1 - e, e - f.bounds().beta * e1});
  }
  at_most(rep, "energy.growth_sandwich", worst, 1e-9);
  const std::vector<double> c(g->num_nodes(), 3.25);
  at_most(rep, "energy.constants_cost_nothing", E.energy(c), 0.0);
}

void capacities(SuiteReport& rep) {
  const double R = std::exp(2.0);
  const double cap = analytic_capacity(2, 1.0, R);
  const AnnulusMinimum m = annulus_minimum(Integrand::constant(2, 1.0), 1.0, R);
  at_most(rep, "capacity.constant_integrand", std::abs(m.value - cap) / cap, 1e-2);
  const Integrand f = presets::sinusoidal(2);
  const std::vector<double> z{0.3, 0.7};
  const AnnulusMinimum s = frozen_annulus_minimum(FrozenIntegrand(f, z), R);
  const double lo = f.bounds().alpha * cap * (1.0 - 1e-2), hi = f.bounds().beta * cap * (1.0 + 1e-2);
  at_most(rep, "capacity.growth_sandwich", (s.value < lo || s.value > hi) ? 1.0 : 0.0, 0.0);
  // the discrete minimum may exceed the continuous bound by the discretization error only
  at_most(rep, "capacity.log_profile_upper_bound", s.value / log_profile_upper_bound(FrozenIntegrand(f, z), R) - 1.0,
          1e-2);
}

void cells(SuiteReport& rep) {
  const Integrand f = presets::checkerboard(2);
  const std::vector<double> xi{1.0, 0.0};
  const CellSolution s = solve_cell_problem(f, xi, 16);
  const bool in = s.fhom_value >= f.bounds().alpha && s.fhom_value <= f.bounds().beta;
  at_most(rep, "cell.fhom_within_growth_bounds", in ? 0.0 : 1.0, 0.0);
  double mean = 0.0;
  for (double v : s.corrector.values) mean += v;
  at_most(rep, "cell.corrector_mean_zero", std::abs(mean) / s.corrector.values.size(), 1e-12);
  at_most(rep, "cell.below_cell_average", s.fhom_value - cell_average(f, xi, 16), 1e-12);
}

void modifications(SuiteReport& rep, int n, std::uint64_t seed) {
  GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, 64.0}, 97, 128)->without_dirichlet();
  const Integrand f = presets::sinusoidal(2);
  const EnergyFunctional E(g, f, at_delta(8.0));
  const ModificationParams p{1.0, 64.0, 3, 1.0};
  int trace = 0, local = 0, pigeon = 0;
  for (int s = 0; s < std::max(1, n / 10); ++s) {
    const DiscreteField u = random_annulus_field(g, seed * 7919 + s + 1);
    const ModificationResult m = modify_to_constant_trace(u, E, p);
    for (auto i : m.ring_nodes) trace += m.field.values[i] != m.trace_value;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      const auto x = g->node(i);
      const double rho = std::hypot(x[0], x[1]);
      if ((rho <= m.inner_radius || rho >= m.outer_radius) && m.field.values[i] != u.values[i]) ++local;
    }
    double mean = 0.0;
    for (double v : m.delta_energy) mean += v;
    mean /= static_cast<double>(m.delta_energy.size());
    pigeon += m.delta_energy[m.chosen_j - 1] > mean;
  }
  at_most(rep, "modification.constant_trace", trace, 0.0);
  at_most(rep, "modification.locality", local, 0.0);
  at_most(rep, "modification.pigeonhole", pigeon, 0.0);
}

void truncation(SuiteReport& rep) {
  GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, std::exp(1.0)}, 33, 64)->without_dirichlet();
  const DiscreteField u = DiscreteField::sample(g, [](std::span<const double> x) {
    return 1.3 * (1.0 - std::log(std::hypot(x[0], x[1]))) - 0.15;
  });
  const Integrand f = Integrand::constant(2, 1.0);
  at_most(rep, "minimize.clamp01_lowers_energy", discrete_energy(clamp01(u), f, 1.0) - discrete_energy(u, f, 1.0), 0.0);
}

void perforations(SuiteReport& rep) {
  const Box omega{{0.0, 0.0}, {2.0, 2.0}};
  const double eps = std::exp(-4.0);
  const PerforationLattice lat = build_lattice(omega, eps, 0.5, 2);
  const PerforatedDomain dom = build_perforated_domain(omega, eps, 0.5, 2, perforation_spacing(lat, true));
  RecoveryOptions o;
  o.alpha = 0.06;
  o.M = 2;
  const RecoveryResult r = recovery_sequence(TargetField::coordinate(0), dom, Integrand::constant(2, 1.0), o);
  at_most(rep, "perforated.vanishes_on_perforations", r.vanishes_on_perforations ? 0.0 : 1.0, 0.0);
  at_most(rep, "perforated.locality", r.local ? 0.0 : 1.0, 0.0);
  double sum = 0.0, smallest = std::numeric_limits<double>::infinity();
  for (double e : r.corrector_energies) {
    sum += e;
    smallest = std::min(smallest, e);
  }
  at_most(rep, "perforated.correction_additivity", std::abs(sum - r.correction_energy), 0.0);
  at_least(rep, "perforated.corrector_energy_positive", r.corrector_energies.empty() ? 1.0 : smallest, 1e-300);
  const RecoveryResult z = recovery_sequence(TargetField::constant(0.0), dom, Integrand::constant(2, 1.0), o);
  at_most(rep, "perforated.zero_target_zero_energy", z.energy, 0.0);
}

void determinism(SuiteReport& rep, std::uint64_t seed) {
  const PoincareEstimate a = poincare_wirtinger_lower_estimate(2, 8, 33, 64, seed);
  const PoincareEstimate b = poincare_wirtinger_lower_estimate(2, 8, 33, 64, seed);
  at_most(rep, "determinism.seeded_ensemble", a.estimate == b.estimate ? 0.0 : 1.0, 0.0);
}

}  // namespace

SuiteReport run_invariant_suite(int n_samples, std::uint64_t seed) {
  SuiteReport rep;
  const int n = std::max(1, n_samples);
  axioms(rep, 5 * n, seed);
  closed_forms(rep, 5 * n, seed);
  grids(rep);
  energies(rep, n, seed);
  capacities(rep);
  cells(rep);
  modifications(rep, n, seed);
  truncation(rep);
  perforations(rep);
  determinism(rep, seed);
  return rep;
}

}  // namespace hetcap
