#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hetcap/error.hpp"
#include "hetcap/grid.hpp"

using namespace hetcap;

namespace {
constexpr double kPi = std::numbers::pi;

DiscreteField log_profile(const GridPtr& g, double R) {
  return DiscreteField::sample(g, [&](std::span<const double> x) {
    return 1.0 - std::log(std::hypot(x[0], x[1])) / std::log(R);
  });
}
}  // namespace

TEST_CASE("annulus rings are log spaced") {
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, std::exp(4.0)}, 128, 64);
  const PolarLayout* p = g->polar();
  REQUIRE(p != nullptr);
  CHECK(p->n_radial == 128);
  CHECK(g->num_nodes() == 128u * 64u);
  CHECK(p->radii.front() == doctest::Approx(1.0));
  CHECK(p->radii.back() == doctest::Approx(std::exp(4.0)));
  CHECK(p->radii[1] / p->radii[0] == doctest::Approx(std::exp(4.0 / 127)));
  CHECK(g->num_free() == 126u * 64u);
}

TEST_CASE("annulus measure approaches the exact area") {
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, 2.0}, 64, 256);
  CHECK(g->total_measure() == doctest::Approx(kPi * 3.0).epsilon(1e-3));
}

TEST_CASE("annulus input errors") {
  CHECK_THROWS_AS(build_annulus_grid({{0.0, 0.0}, 2.0, 1.0}, 16, 16), InputError);
  CHECK_THROWS_AS(build_annulus_grid({{0.0, 0.0}, 1.0, 2.0}, 1, 16), InputError);
}

TEST_CASE("periodic cell") {
  const GridPtr g = build_periodic_cell(4, 2);
  CHECK(g->num_nodes() == 16u);
  CHECK(g->num_cells() == 16u);
  CHECK(g->zero_mean());
  CHECK(g->total_measure() == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_periodic_cell(3, 2), InputError);
  CHECK(build_periodic_cell(4, 3)->total_measure() == doctest::Approx(1.0));
}

TEST_CASE("masked box ball count") {
  const double h = 0.005;
  const GridPtr g = build_masked_box(Box::unit(2), h, {{{0.5, 0.5}, 0.1, 1.0}}, 0.0);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < g->num_nodes(); ++i) {
    const auto x = g->node(i);
    if (g->is_fixed(i) && g->fixed_value(i) == 1.0) ++inside;
    if (std::hypot(x[0] - 0.5, x[1] - 0.5) <= 0.1) CHECK(g->is_fixed(i));
  }
  CHECK(static_cast<double>(inside) == doctest::Approx(kPi * 0.01 / (h * h)).epsilon(0.02));
  CHECK(g->total_measure() == doctest::Approx(1.0));
}

TEST_CASE("masked box rejects unresolved balls") {
  CHECK_THROWS_AS(build_masked_box(Box::unit(2), 0.01, {{{0.5, 0.5}, 0.01, 1.0}}, 0.0), ResolutionError);
  CHECK_THROWS_AS(build_masked_box(Box::unit(2), 0.01, {{{3.0, 3.0}, 0.1, 1.0}}, 0.0), InputError);
}

TEST_CASE("log profile energy") {
  const double R = std::exp(2.0);
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, R}, 65, 256);
  const double e = discrete_energy(log_profile(g, R), presets::constant(2), 1.0);
  CHECK(e == doctest::Approx(2 * kPi / 2.0).epsilon(1e-2));
}

TEST_CASE("energy scales like t^d") {
  const GridPtr g = build_periodic_cell(8, 2);
  const DiscreteField u = DiscreteField::sample(g, [](std::span<const double> x) {
    return std::sin(2 * kPi * x[0]) + 0.3 * std::cos(2 * kPi * x[1]);
  });
  DiscreteField v = u;
  for (double& x : v.values) x *= 3.0;
  const Integrand f = presets::laminate(2);
  CHECK(discrete_energy(v, f, 1.0) == doctest::Approx(9.0 * discrete_energy(u, f, 1.0)).epsilon(1e-12));
}

TEST_CASE("constant fields cost nothing") {
  const GridPtr g = build_masked_box(Box::unit(2), 0.1, {}, std::nullopt);
  const DiscreteField u(g, std::vector<double>(g->num_nodes(), 0.7));
  CHECK(discrete_energy(u, presets::checkerboard(2), 0.3) == doctest::Approx(0.0));
}

TEST_CASE("energy gradient matches finite differences") {
  const double R = std::exp(1.0);
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, R}, 8, 16);
  const Integrand f = presets::sinusoidal(2);
  DiscreteField u = DiscreteField::sample(g, [&](std::span<const double> x) {
    return 0.5 + 0.2 * std::sin(3 * x[0]) * x[1];
  });
  const DiscreteField grad = energy_gradient(u, f, 0.7);
  for (std::size_t i = 0; i < g->num_nodes(); i += 7) {
    if (g->is_fixed(i)) {
      CHECK(grad.values[i] == 0.0);
      continue;
    }
    const double h = 1e-6;
    DiscreteField p = u, m = u;
    p.values[i] += h;
    m.values[i] -= h;
    const double fd = (discrete_energy(p, f, 0.7) - discrete_energy(m, f, 0.7)) / (2 * h);
    CHECK(grad.values[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("growth sandwich") {
  const GridPtr g = build_masked_box(Box::unit(2), 0.05, {}, std::nullopt);
  const DiscreteField u = DiscreteField::sample(g, [](std::span<const double> x) { return x[0] * x[0] - x[1]; });
  const double base = discrete_energy(u, presets::constant(2), 1.0);
  const double e = discrete_energy(u, presets::sinusoidal(2), 0.25);
  CHECK(e >= 1.0 * base - 1e-12);
  CHECK(e <= 3.0 * base + 1e-12);
}

TEST_CASE("feasible field satisfies constraints") {
  const GridPtr g = build_annulus_grid({{0.0, 0.0}, 1.0, 4.0}, 16, 32);
  const DiscreteField u = DiscreteField::feasible(g, 0.5);
  CHECK(u.satisfies_constraints());
  CHECK(u.values.front() == 1.0);
  CHECK(u.values.back() == 0.0);
}
