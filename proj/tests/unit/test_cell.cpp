#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hetcap/cell.hpp"
#include "hetcap/error.hpp"

using namespace hetcap;

TEST_CASE("constant density needs no corrector") {
  const std::vector<double> xi{0.6, -0.8};
  const CellSolution s = solve_cell_problem(presets::constant(2, 3.0), xi, 16);
  CHECK(s.fhom_value == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("laminate: harmonic and arithmetic means") {
  const Integrand f = presets::laminate(2);
  const std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
  CHECK(solve_cell_problem(f, e1, 32).fhom_value == doctest::Approx(8.0 / 5).epsilon(1e-6));
  CHECK(solve_cell_problem(f, e2, 32).fhom_value == doctest::Approx(5.0 / 2).epsilon(1e-6));
}

TEST_CASE("checkerboard geometric mean") {
  const HomogenizedMatrix m = quadratic_homogenized_matrix(presets::checkerboard(2), 64);
  CHECK(m.sqrt_det == doctest::Approx(2.0).epsilon(3e-2));
  CHECK(m.A.xx == doctest::Approx(m.A.yy).epsilon(1e-8));
}

TEST_CASE("corrector has zero mean") {
  const std::vector<double> xi{1.0, 0.3};
  const CellSolution s = solve_cell_problem(presets::checkerboard(2), xi, 16);
  double sum = 0.0;
  for (double v : s.corrector.values) sum += v;
  CHECK(std::abs(sum) / s.corrector.values.size() < 1e-10);
}

TEST_CASE("homogenized density is homogeneous") {
  const Integrand f = presets::sinusoidal(2);
  const std::vector<double> xi{0.4, 0.9}, txi{1.2, 2.7};
  const double a = solve_cell_problem(f, xi, 16).fhom_value;
  CHECK(solve_cell_problem(f, txi, 16).fhom_value == doctest::Approx(9.0 * a).epsilon(1e-8));
}

TEST_CASE("cell minimum is bounded by the average and the growth constants") {
  for (const auto& name : presets::names()) {
    const Integrand f = presets::by_name(name, 2);
    const std::vector<double> xi{0.8, 0.6};
    const double v = solve_cell_problem(f, xi, 16).fhom_value;
    CHECK(v <= cell_average(f, xi, 16) + 1e-10);
    CHECK(v >= f.bounds().alpha - 1e-10);
    CHECK(v <= f.bounds().beta + 1e-10);
  }
}

TEST_CASE("refinement lowers a laminate cell value along the layers' normal") {
  // the laminate in e1 is exact for every even n, the checkerboard is not
  const std::vector<double> xi{1.0, 0.0};
  const double c8 = solve_cell_problem(presets::checkerboard(2), xi, 8).fhom_value;
  const double c32 = solve_cell_problem(presets::checkerboard(2), xi, 32).fhom_value;
  CHECK(c32 < c8 + 1e-12);
}

TEST_CASE("three-dimensional cell problem") {
  const std::vector<double> e1{1.0, 0.0, 0.0};
  CHECK(solve_cell_problem(presets::constant(3), e1, 8).fhom_value == doctest::Approx(1.0).epsilon(1e-8));
  const double v = solve_cell_problem(presets::laminate(3), e1, 8).fhom_value;
  CHECK(v > 1.0);
  CHECK(v < 2.5);
}

TEST_CASE("fhom table of the laminate") {
  const Integrand t = tabulate_fhom(presets::laminate(2), 16, 16);
  const std::vector<double> x{0.0, 0.0}, e1{1.0, 0.0}, e2{0.0, 1.0};
  CHECK(t.evaluate(x, e1) == doctest::Approx(8.0 / 5).epsilon(1e-6));
  CHECK(t.evaluate(x, e2) == doctest::Approx(5.0 / 2).epsilon(1e-6));
  CHECK(t.x_independent());
}

TEST_CASE("cell input errors") {
  const std::vector<double> xi{1.0, 0.0};
  CHECK_THROWS_AS(solve_cell_problem(presets::constant(2), xi, 4), InputError);
  CHECK_THROWS_AS(tabulate_fhom(presets::laminate(3), 16, 16), InputError);
}
