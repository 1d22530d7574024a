#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hetcap/capacity.hpp"
#include "hetcap/error.hpp"
#include "hetcap/minimize.hpp"

using namespace hetcap;

namespace {
constexpr double kPi = std::numbers::pi;

MinimizeResult annulus_solve(double r, double R, int nr = 65, int na = 128, SolveOptions o = {}) {
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, r, R}, nr, na);
  return minimize_energy(g, presets::constant(2), 1.0, DiscreteField::feasible(g, 0.5), o);
}
}  // namespace

TEST_CASE("annulus minimum is close to the capacity of the ball") {
  const MinimizeResult m = annulus_solve(1.0, std::exp(2.0));
  CHECK(m.converged);
  CHECK(m.energy == doctest::Approx(2 * kPi / 2.0).epsilon(1e-2));
}

TEST_CASE("starting at the minimizer stays there") {
  const MinimizeResult m = annulus_solve(1.0, std::exp(1.0));
  const EnergyFunctional E(m.field.grid, presets::constant(2));
  const MinimizeResult again = minimize_energy(E, m.field);
  CHECK(again.energy == doctest::Approx(m.energy).epsilon(1e-10));
  CHECK(again.iterations <= 2);
}

TEST_CASE("infeasible start is rejected") {
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, 2.0}, 16, 32);
  DiscreteField u = DiscreteField::feasible(g, 0.5);
  u.values.front() = 0.3;
  CHECK_THROWS_AS(minimize_energy(g, presets::constant(2), 1.0, u), PreconditionError);
}

TEST_CASE("history is monotone") {
  SolveOptions o;
  o.keep_history = true;
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, 8.0}, 33, 64);
  const MinimizeResult m = minimize_energy(g, presets::sinusoidal(2), 0.5, DiscreteField::feasible(g, 0.0), o);
  REQUIRE(m.history.size() >= 2);
  for (std::size_t i = 1; i < m.history.size(); ++i) CHECK(m.history[i] <= m.history[i - 1] + 1e-12);
}

TEST_CASE("nonquadratic energy converges") {
  const GridPtr g = build_masked_box(Box::unit(3), 0.125, {{{0.5, 0.5, 0.5}, 0.3, 1.0}}, 0.0);
  const MinimizeResult m = minimize_energy(g, presets::constant(3), 1.0, DiscreteField::feasible(g, 0.0));
  CHECK(m.converged);
  CHECK(m.energy > 0.0);
}

TEST_CASE("clamp01") {
  const GridPtr g = build_periodic_cell(4, 2);
  std::vector<double> v(16, 0.5);
  v[0] = -0.2;
  v[1] = 1.7;
  v[2] = 1.0;
  const DiscreteField c = clamp01(DiscreteField(g, v));
  CHECK(c.values[0] == 0.0);
  CHECK(c.values[1] == 1.0);
  CHECK(c.values[2] == 1.0);
  CHECK(c.values[3] == 0.5);
}

TEST_CASE("minimum decreases as the outer radius grows") {
  double prev = 1e300;
  for (double R : {4.0, 8.0, 16.0}) {
    const MinimizeResult m = annulus_solve(1.0, R, 17 + static_cast<int>(16 * std::log(R)), 128);
    CHECK(m.energy < prev);
    prev = m.energy;
  }
}

TEST_CASE("minimum is dilation invariant in two dimensions") {
  const MinimizeResult a = annulus_solve(1.0, 5.0);
  const MinimizeResult b = annulus_solve(3.0, 15.0);
  CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-9));
}
