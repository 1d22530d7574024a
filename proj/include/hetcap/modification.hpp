#pragma once

#include <cstdint>
#include <vector>

#include "hetcap/grid.hpp"
#include "hetcap/integrand.hpp"

namespace hetcap {

/// Dyadic structure on B(z,R) \ B(z,r): S = max{s : eta 2^s <= R}.
struct ModificationParams {
  double eta = 1.0;
  double R = 8.0;
  int N = 2;
  double r = 1.0;

  int S() const;
  /// Throws ParameterError unless S >= 3, 2 <= N < S and r <= eta 2^{S-N}.
  void validate() const;
};

/// Tent profile: 0 outside (inner, outer), 1 at peak, linear in between.
struct DyadicCutoff {
  double inner = 0.0;
  double peak = 0.0;
  double outer = 0.0;

  double operator()(double rho) const;
  /// Largest slope of the profile, 1 / inner.
  double slope_bound() const { return 1.0 / inner; }
};

/// Cutoff number k in 1..N-1, peaking at eta 2^{S-N+k}.
DyadicCutoff dyadic_cutoff(int k, const ModificationParams& p);

struct ModificationResult {
  DiscreteField field;
  int chosen_j = 0;  // ring radius eta 2^{S-j}
  double trace_value = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double energy_ratio = 1.0;
  std::vector<double> delta_energy;  // entry j-1 is the energy change of candidate j
  std::vector<std::uint32_t> ring_nodes;
  double ring_radius = 0.0;
  double inner_radius = 0.0;  // v == u outside (inner_radius, outer_radius)
  double outer_radius = 0.0;
};

/// Replaces u by psi u + (1 - psi) mean(u) on the dyadic annulus where that
/// costs the least energy, which makes v constant on the middle ring. The
/// center defaults to the center of a polar grid and is required otherwise.
ModificationResult modify_to_constant_trace(const DiscreteField& u, const Integrand& f, double delta,
                                            const ModificationParams& p, std::span<const double> center = {});

/// Same, reusing a prebuilt energy functional on u's grid.
ModificationResult modify_to_constant_trace(const DiscreteField& u, const EnergyFunctional& energy,
                                            const ModificationParams& p, std::span<const double> center = {});

/// Smooth random field on a polar annulus: low angular modes times Chebyshev
/// polynomials in log radius, coefficients decaying with the mode number.
DiscreteField random_annulus_field(GridPtr polar_grid, std::uint64_t seed, int modes = 4);

struct PoincareEstimate {
  double estimate = 0.0;  // running max of |u - mean|_d^d / |grad u|_d^d
  double x1_ratio = 0.0;  // the same ratio for u = x_1
  int samples = 0;
};

/// Lower estimate of P^d on B(0,4) \ B(0,1) from u = x_1 and n_samples random
/// smooth fields (d = 2).
PoincareEstimate poincare_wirtinger_lower_estimate(int d, int n_samples, int n_radial, int n_angular,
                                                   std::uint64_t seed);

/// |u - mean|_d^d / |grad u|_d^d on any grid, midpoint rule. Zero-gradient
/// fields give 0.
double poincare_ratio(const DiscreteField& u);

}  // namespace hetcap
