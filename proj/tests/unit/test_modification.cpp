#include <cmath>
#include <vector>

#include "doctest.h"
#include "hetcap/error.hpp"
#include "hetcap/modification.hpp"

using namespace hetcap;

namespace {

GridPtr reference_annulus(double R = 64.0) {
  return build_annulus_grid({{0.0, 0.0}, 1.0, R}, 97, 128)->without_dirichlet();
}

}  // namespace

TEST_CASE("dyadic structure") {
  const ModificationParams p{1.0, 64.0, 3, 1.0};
  CHECK(p.S() == 6);
  CHECK((ModificationParams{1.0, 63.9, 3, 1.0}.S()) == 5);
  const DyadicCutoff c = dyadic_cutoff(1, p);
  CHECK(c.peak == doctest::Approx(16.0));
  CHECK(c.inner == doctest::Approx(8.0));
  CHECK(c.outer == doctest::Approx(32.0));
  CHECK(c(16.0) == doctest::Approx(1.0));
  CHECK(c(12.0) == doctest::Approx(0.5));
  CHECK(c(24.0) == doctest::Approx(0.5));
  CHECK(c(8.0) == 0.0);
  CHECK(c(40.0) == 0.0);
  CHECK(c.slope_bound() == doctest::Approx(1.0 / 8));
  CHECK(dyadic_cutoff(2, p).peak == doctest::Approx(32.0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((ModificationParams{1.0, 4.0, 2, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((ModificationParams{1.0, 64.0, 1, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((ModificationParams{1.0, 64.0, 6, 1.0}.validate()), ParameterError);
  CHECK_THROWS_AS((ModificationParams{1.0, 64.0, 3, 9.0}.validate()), ParameterError);
  CHECK_NOTHROW((ModificationParams{1.0, 64.0, 3, 8.0}.validate()));
  CHECK_THROWS_AS(dyadic_cutoff(3, ModificationParams{1.0, 64.0, 3, 1.0}), ParameterError);
}

TEST_CASE("constant field is left alone") {
  const GridPtr g = reference_annulus();
  const DiscreteField u(g, std::vector<double>(g->num_nodes(), 0.4));
  const ModificationResult m = modify_to_constant_trace(u, presets::constant(2), 1.0, {1.0, 64.0, 3, 1.0});
  CHECK(m.chosen_j == 1);
  CHECK(m.energy_after <= 1e-20);
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(m.field.values[i] == doctest::Approx(0.4));
}

TEST_CASE("modified field: constant ring, locality, cheapest candidate") {
  const GridPtr g = reference_annulus();
  const ModificationParams p{1.0, 64.0, 4, 1.0};
  for (std::uint64_t seed : {3u, 17u, 99u}) {
    const DiscreteField u = random_annulus_field(g, seed);
    const ModificationResult m = modify_to_constant_trace(u, presets::sinusoidal(2), 4.0, p);
    REQUIRE_FALSE(m.ring_nodes.empty());
    for (auto i : m.ring_nodes) CHECK(m.field.values[i] == m.trace_value);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      const auto x = g->node(i);
      const double rho = std::hypot(x[0], x[1]);
      if (rho <= m.inner_radius || rho >= m.outer_radius) CHECK(m.field.values[i] == u.values[i]);
    }
    double sum = 0.0, lo = 1e300;
    for (double v : m.delta_energy) {
      sum += v;
      lo = std::min(lo, v);
    }
    CHECK(m.delta_energy[m.chosen_j - 1] == lo);
    CHECK(lo <= sum / m.delta_energy.size() + 1e-15);
    CHECK(m.energy_after == doctest::Approx(m.energy_before + lo).epsilon(1e-9));
  }
}

TEST_CASE("ties go to the smallest index") {
  const GridPtr g = reference_annulus();
  const DiscreteField u(g, std::vector<double>(g->num_nodes(), 1.0));
  CHECK(modify_to_constant_trace(u, presets::constant(2), 1.0, {1.0, 64.0, 4, 1.0}).chosen_j == 1);
}

TEST_CASE("ratio for a coordinate function") {
  const double ratio = poincare_ratio(DiscreteField::sample(
      build_annulus_grid({{0.0, 0.0}, 1.0, 4.0}, 97, 256)->without_dirichlet(),
      [](std::span<const double> x) { return x[0]; }));
  // int x^2 / int 1 over 1 < |x| < 4: (pi/4)(4^4 - 1) / (pi (16 - 1))
  CHECK(ratio == doctest::Approx(255.0 / 60.0).epsilon(1e-2));
}

TEST_CASE("Poincare estimate is a running maximum") {
  const PoincareEstimate a = poincare_wirtinger_lower_estimate(2, 5, 33, 64, 1);
  const PoincareEstimate b = poincare_wirtinger_lower_estimate(2, 20, 33, 64, 1);
  CHECK(a.estimate >= a.x1_ratio);
  CHECK(b.estimate >= a.estimate);
  CHECK(b.samples == 21);  // u = x_1 counts as a sample
}

TEST_CASE("random fields are reproducible") {
  const GridPtr g = reference_annulus(16.0);
  CHECK(random_annulus_field(g, 5).values == random_annulus_field(g, 5).values);
  CHECK(random_annulus_field(g, 5).values != random_annulus_field(g, 6).values);
}

TEST_CASE("modification is scale invariant in two dimensions") {
  const GridPtr g1 = build_annulus_grid({{0.0, 0.0}, 1.0, 64.0}, 97, 128)->without_dirichlet();
  const GridPtr g2 = build_annulus_grid({{0.0, 0.0}, 2.0, 128.0}, 97, 128)->without_dirichlet();
  const DiscreteField u1 = random_annulus_field(g1, 11);
  const DiscreteField u2(g2, u1.values);
  const auto f = presets::constant(2);
  const ModificationResult a = modify_to_constant_trace(u1, f, 1.0, {1.0, 64.0, 3, 1.0});
  const ModificationResult b = modify_to_constant_trace(u2, f, 1.0, {2.0, 128.0, 3, 2.0});
  CHECK(a.chosen_j == b.chosen_j);
  CHECK(b.energy_ratio == doctest::Approx(a.energy_ratio).epsilon(1e-9));
}
