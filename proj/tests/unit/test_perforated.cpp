#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hetcap/error.hpp"
#include "hetcap/perforated.hpp"

using namespace hetcap;

namespace {
constexpr double kPi = std::numbers::pi;

Box square(double side) { return Box{{0.0, 0.0}, {side, side}}; }

RecoveryOptions small_recovery() {
  RecoveryOptions o;
  o.alpha = 0.06;
  o.M = 2;
  o.corrector_n = 16;
  return o;
}
}  // namespace

TEST_CASE("critical period") {
  CHECK(critical_period(std::exp(-4.0), 2) == doctest::Approx(0.5));
  CHECK(critical_period(std::exp(-16.0), 2) == doctest::Approx(0.25));
  CHECK(critical_period(std::exp(-8.0), 3) == doctest::Approx(0.25));
  CHECK_THROWS_AS(critical_period(2.0, 2), InputError);
}

TEST_CASE("lattice agrees with a direct enumeration") {
  for (double side : {1.0, 2.0, 2.3}) {
    const double eps = std::exp(-4.0);
    const PerforationLattice L = build_lattice(square(side), eps, 0.5, 2);
    const double dk = L.period;
    std::size_t all = 0, inner = 0;
    for (int i = -10; i <= 20; ++i) {
      for (int j = -10; j <= 20; ++j) {
        const double x = i * dk, y = j * dk;
        const double dx = std::max({0.0, -x, x - side}), dy = std::max({0.0, -y, y - side});
        if (dx * dx + dy * dy >= eps * eps) continue;
        ++all;
        if (std::min({x, y, side - x, side - y}) > dk) ++inner;
      }
    }
    CHECK(L.centers.size() == all);
    CHECK(L.interior.size() == inner);
    CHECK(L.interior.size() + L.boundary.size() == all);
  }
}

TEST_CASE("period is a whole multiple of the oscillation scale") {
  for (double lambda : {0.0, 0.25, 0.5, 1.0}) {
    const PerforationLattice L = build_lattice(square(1.0), std::exp(-5.0), lambda, 2);
    CHECK(L.m >= 2);
    CHECK(L.delta * L.m == doctest::Approx(L.period));
    CHECK(L.delta <= L.delta_requested * (1 + 1e-12));
  }
  const PerforationLattice z = build_lattice(square(1.0), std::exp(-5.0), 0.0, 2);
  CHECK(z.delta_requested == doctest::Approx(0.2));
}

TEST_CASE("box too small for any perforation") {
  CHECK_THROWS_AS(build_lattice(Box{{0.1, 0.1}, {0.3, 0.3}}, std::exp(-4.0), 0.5, 2), DomainTooSmallError);
}

TEST_CASE("perforated domain fixes the perforations at zero") {
  const PerforatedDomain D = build_perforated_domain(square(1.0), std::exp(-3.0), 0.5, 2);
  CHECK(D.h == doctest::Approx(std::min(std::exp(-3.0) / 4, D.lattice.delta / 8)));
  std::size_t fixed = 0;
  for (std::size_t i = 0; i < D.grid->num_nodes(); ++i) {
    const auto x = D.grid->node(i);
    bool in = false;
    for (const auto& c : D.lattice.centers) in = in || std::hypot(x[0] - c[0], x[1] - c[1]) <= D.lattice.eps;
    CHECK(D.grid->is_fixed(i) == in);
    if (D.grid->is_fixed(i)) {
      CHECK(D.grid->fixed_value(i) == 0.0);
      ++fixed;
    }
  }
  CHECK(fixed > 0);
}

TEST_CASE("capacitary profile") {
  const std::vector<double> c{0.0, 0.0};
  const double eps = 0.01, r = 0.01 * std::exp(2.0);
  const CapacitaryProfile p = capacitary_profile(c, eps, r, 2);
  CHECK(p.energy == doctest::Approx(2 * kPi / 2.0).epsilon(2e-2));
  for (double v : p.field.values) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
  CHECK(p.value_at(std::vector<double>{0.005, 0.0}) == 0.0);
  CHECK(p.value_at(std::vector<double>{0.2, 0.1}) == 1.0);
  // halfway in log radius the profile is one half
  CHECK(p.value_at(std::vector<double>{0.01 * std::exp(1.0), 0.0}) == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("recovery of the zero target is zero") {
  const PerforatedDomain D = build_perforated_domain(square(2.0), std::exp(-4.0), 0.5, 2, std::exp(-4.0) / 4);
  const RecoveryResult r = recovery_sequence(TargetField::constant(0.0), D, presets::constant(2), small_recovery());
  CHECK(r.energy == doctest::Approx(0.0));
  for (double v : r.field.values) CHECK(v == 0.0);
}

TEST_CASE("recovery of a constant target") {
  const PerforatedDomain D = build_perforated_domain(square(2.0), std::exp(-4.0), 0.5, 2, std::exp(-4.0) / 4);
  REQUIRE(D.lattice.interior.size() == 1);
  const RecoveryResult r = recovery_sequence(TargetField::constant(1.0), D, presets::constant(2), small_recovery());
  CHECK(r.vanishes_on_perforations);
  CHECK(r.local);
  CHECK(r.outer_energy == doctest::Approx(0.0));
  REQUIRE(r.corrector_energies.size() == 1);
  CHECK(r.corrector_energies[0] > 0.0);
  CHECK(r.energy >= r.correction_energy - 1e-12);
  CHECK(r.r_k == doctest::Approx(0.06 * 8 * D.lattice.period));
}

TEST_CASE("recovery of a linear target keeps the bulk energy") {
  const PerforatedDomain D = build_perforated_domain(square(2.0), std::exp(-4.0), 0.5, 2, std::exp(-4.0) / 4);
  const RecoveryResult r = recovery_sequence(TargetField::coordinate(0), D, presets::constant(2), small_recovery());
  CHECK(r.vanishes_on_perforations);
  CHECK(r.local);
  // grad x_1 integrates to the area
  CHECK(r.outer_energy == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("recovery preconditions") {
  const PerforatedDomain D = build_perforated_domain(square(2.0), std::exp(-4.0), 0.5, 2, std::exp(-4.0) / 4);
  RecoveryOptions o = small_recovery();
  o.alpha = 0.2;
  CHECK_THROWS_AS(recovery_sequence(TargetField::constant(1.0), D, presets::constant(2), o), ParameterError);
  o = small_recovery();
  o.M = 1;
  CHECK_THROWS_AS(recovery_sequence(TargetField::constant(1.0), D, presets::constant(2), o), ParameterError);
  o = small_recovery();
  o.alpha = 0.01;
  CHECK_THROWS_AS(recovery_sequence(TargetField::constant(1.0), D, presets::constant(2), o), ParameterError);
}

TEST_CASE("limit energy by quadrature") {
  const GammaLimitEnergy a = gamma_limit_energy(TargetField::coordinate(0), presets::constant(2), 2.0, square(1.0));
  CHECK(a.bulk == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.strange == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(a.total == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  const GammaLimitEnergy b = gamma_limit_energy(TargetField::constant(1.0), presets::laminate(2), 3.0, square(2.0));
  CHECK(b.bulk == 0.0);
  CHECK(b.strange == doctest::Approx(12.0));
}

TEST_CASE("cube averages") {
  const PerforationLattice L = build_lattice(square(2.0), std::exp(-4.0), 0.5, 2);
  const CubeProjection c = piecewise_mean_projection(TargetField::constant(2.0), L);
  REQUIRE(c.means.size() == L.interior.size());
  for (double m : c.means) CHECK(m == doctest::Approx(2.0));
  const CubeProjection x = piecewise_mean_projection(TargetField::coordinate(0), L);
  CHECK(x.means[0] == doctest::Approx(L.centers[L.interior[0]][0]).epsilon(1e-10));
}
