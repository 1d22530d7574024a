#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hetcap/capacity.hpp"
#include "hetcap/error.hpp"

using namespace hetcap;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("unit sphere measures") {
  CHECK(sigma(2) == doctest::Approx(2 * kPi));
  CHECK(sigma(3) == doctest::Approx(4 * kPi));
  CHECK(sigma(4) == doctest::Approx(2 * kPi * kPi));
  CHECK_THROWS_AS(sigma(1), InputError);
}

TEST_CASE("analytic capacity") {
  CHECK(analytic_capacity(2, 1.0, std::exp(2.0)) == doctest::Approx(kPi));
  CHECK(analytic_capacity(3, 1.0, std::exp(2.0)) == doctest::Approx(kPi));
  CHECK(analytic_capacity(2, 2.0, 2.0 * std::exp(1.0)) == doctest::Approx(2 * kPi));
  CHECK_THROWS_AS(analytic_capacity(2, 2.0, 1.0), InputError);
}

TEST_CASE("constant annulus minimum") {
  const AnnulusMinimum m = annulus_minimum(presets::constant(2, 2.0), 1.0, std::exp(2.0));
  CHECK(m.converged);
  CHECK(m.value == doctest::Approx(2.0 * kPi).epsilon(1e-2));
}

TEST_CASE("frozen scalar coefficient scales the capacity") {
  const Integrand f = presets::sinusoidal(2);
  const std::vector<double> z{0.25, 0.0};
  const AnnulusMinimum m = frozen_annulus_minimum(FrozenIntegrand(f, z), std::exp(2.0));
  CHECK(m.value == doctest::Approx(3.0 * kPi).epsilon(1e-2));
}

TEST_CASE("x-dependent integrands are refused by the annulus solver") {
  CHECK_THROWS_AS(annulus_minimum(presets::laminate(2), 1.0, 4.0), InputError);
}

TEST_CASE("log model fit recovers exact data") {
  std::vector<LogSample> s;
  for (double L : {2.0, 3.0, 4.0}) s.push_back({std::exp(L), 0.0, 5.0 + 1.5 / L});
  const LogExtrapolation fit = fit_log_model(s, 2);
  CHECK(fit.estimate == doctest::Approx(5.0));
  CHECK(fit.slope == doctest::Approx(1.5));
  CHECK(fit.residual == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(fit.low_confidence);
}

TEST_CASE("phi estimate for constant and frozen integrands") {
  const LogExtrapolation c = phi_estimate(presets::constant(2), std::vector<double>{0.1, 0.2}, default_schedule());
  CHECK(c.estimate == doctest::Approx(2 * kPi).epsilon(2e-2));
  const LogExtrapolation s =
      phi_estimate(presets::sinusoidal(2), std::vector<double>{0.75, 0.0}, default_schedule());
  CHECK(s.estimate == doctest::Approx(2 * kPi).epsilon(2e-2));
}

TEST_CASE("anisotropic quadratic density") {
  // <A xi, xi> with A = diag(1, 4) has limit 2 pi sqrt(det A)
  const Integrand f = Integrand::quadratic_matrix([](std::span<const double>) { return Sym2{1.0, 0.0, 4.0}; },
                                                  {1.0, 4.0}, "diag14");
  const LogExtrapolation e = phi_estimate(f, std::vector<double>{0.0, 0.0}, default_schedule());
  CHECK(e.estimate == doctest::Approx(4 * kPi).epsilon(3e-2));
}

TEST_CASE("log profile bounds the minimum from above") {
  const Integrand f = presets::sinusoidal(2);
  const std::vector<double> z{0.1, 0.0};
  const FrozenIntegrand fz(f, z);
  const double R = std::exp(3.0);
  const double ub = log_profile_upper_bound(fz, R);
  const double a = 2.0 + std::sin(2 * kPi * 0.1);
  CHECK(ub == doctest::Approx(a * 2 * kPi / 3.0).epsilon(1e-9));
  CHECK(frozen_annulus_minimum(fz, R).value <= ub * 1.01);
}

TEST_CASE("scaling covariance") {
  const AnnulusMinimum a = annulus_minimum(presets::constant(2), 1.0, 6.0);
  const AnnulusMinimum b = annulus_minimum(presets::constant(2, 5.0), 1.0, 6.0);
  CHECK(b.value == doctest::Approx(5.0 * a.value).epsilon(1e-8));
}

TEST_CASE("refinement reduces the error") {
  const double exact = analytic_capacity(2, 1.0, std::exp(2.0));
  const PolarResolution res;
  const double e1 = std::abs(annulus_minimum(presets::constant(2), 1.0, std::exp(2.0), res).value - exact);
  const double e2 =
      std::abs(annulus_minimum(presets::constant(2), 1.0, std::exp(2.0), res.refined(2)).value - exact);
  CHECK(e2 < e1);
}
