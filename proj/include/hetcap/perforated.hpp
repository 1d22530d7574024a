#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hetcap/capacity.hpp"
#include "hetcap/grid.hpp"
#include "hetcap/integrand.hpp"
#include "hetcap/minimize.hpp"

namespace hetcap {

/// |log eps|^{(1-d)/d}.
double critical_period(double eps, int d);

/// Perforation centers i * period for every lattice index whose eps-ball
/// meets the box. interior holds the centers farther than one period from
/// the boundary, boundary the rest.
struct PerforationLattice {
  Box omega;
  int d = 2;
  double eps = 0.0;
  double lambda = 0.0;
  double period = 0.0;           // d_k
  double delta_requested = 0.0;  // eps^lambda (1/|log eps| when lambda = 0)
  double delta = 0.0;            // period / m
  int m = 0;
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> interior;
  std::vector<std::size_t> boundary;
};

PerforationLattice build_lattice(const Box& omega, double eps, double lambda, int d);

struct PerforatedDomain {
  PerforationLattice lattice;
  GridPtr grid;  // perforation nodes fixed at 0, no other constraint
  double h = 0.0;
};

/// Spacing preset min(eps/4, delta/8), or eps/4 for x-independent integrands.
double perforation_spacing(const PerforationLattice& lattice, bool x_independent);

/// Masked box with every perforation fixed at 0. h = 0 picks min(eps/4, delta/8).
PerforatedDomain build_perforated_domain(const Box& omega, double eps, double lambda, int d, double h = 0.0);

/// Homogeneous capacitary profile: 0 on B(center, eps), 1 outside B(center, r_out),
/// discrete minimizer of |grad u|^d in between (d = 2, polar grid).
struct CapacitaryProfile {
  std::vector<double> center;
  double eps = 0.0;
  double r_out = 0.0;
  double energy = 0.0;
  DiscreteField field;

  /// Interpolated value at x (bilinear in log radius and angle).
  double value_at(std::span<const double> x) const;
};

CapacitaryProfile capacitary_profile(std::span<const double> center, double eps, double r_out, int d,
                                     const PolarResolution& res = {});

/// Target function with its gradient.
struct TargetField {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;

  static TargetField constant(double c);
  /// u(x) = x_axis.
  static TargetField coordinate(int axis);
};

struct RecoveryOptions {
  double alpha = 1.0 / 20.0;  // needs alpha 2^{M+1} < 1/2
  int M = 2;
  int corrector_n = 32;            // periodic cell resolution for the two-scale term
  PolarResolution profile{};       // boundary-layer profiles
  SolveOptions solve{};
};

struct RecoveryResult {
  DiscreteField field;  // on the perforated grid with its constraints removed
  double energy = 0.0;
  double outer_energy = 0.0;  // energy of the unperforated two-scale field
  std::vector<double> corrector_energies;  // one per interior perforation
  double correction_energy = 0.0;
  double boundary_energy = 0.0;  // energy on cells within r_k of a boundary-layer perforation
  double r_k = 0.0;
  bool vanishes_on_perforations = false;
  bool local = false;  // equals the two-scale field outside every correction ball
};

/// Recovery field: two-scale field, modification around interior perforations
/// followed by plateaus and local capacitary correctors, then homogeneous
/// profiles multiplied in on boundary-layer perforations.
RecoveryResult recovery_sequence(const TargetField& u, const PerforatedDomain& domain, const Integrand& f,
                                 const RecoveryOptions& opts = {});

struct GammaLimitEnergy {
  double bulk = 0.0;
  double strange = 0.0;
  double total = 0.0;
};

/// int f_hom(grad u) + C int |u|^d by tensor Gauss quadrature (3 points per
/// axis on n cells per axis).
GammaLimitEnergy gamma_limit_energy(const TargetField& u, const Integrand& fhom, double c_lambda_value,
                                    const Box& omega, int n = 64);

struct StrangeTermRow {
  double eps = 0.0;
  double period = 0.0;
  double delta_requested = 0.0;
  double delta = 0.0;
  std::size_t interior = 0;
  std::size_t boundary = 0;
  double recovery_energy = 0.0;
  double per_area = 0.0;
  double gamma_energy = 0.0;
  double gap = 0.0;           // |recovery - gamma|
  double relative_gap = 0.0;  // gap / gamma (0 when both vanish)
  double boundary_share = 0.0;
  bool vanishes = false;
};

struct StrangeTermOptions {
  RecoveryOptions recovery{};
  double tolerance = 0.2;  // final relative gap
  std::optional<double> c_lambda_value;  // estimated from the capacity and cell modules when unset
  std::optional<Integrand> fhom;         // tabulated when unset and f depends on x
  double h = 0.0;
};

struct StrangeTermReport {
  double lambda = 0.0;
  double c_lambda_value = 0.0;
  std::vector<StrangeTermRow> rows;
  bool gap_decreasing = false;
  bool final_within_tolerance = false;
  bool vanishes = false;
  bool pass = false;
};

StrangeTermReport strange_term_experiment(const TargetField& u, const Integrand& f, double lambda,
                                          const std::vector<double>& eps_schedule, const Box& omega,
                                          const StrangeTermOptions& opts = {});

struct CubeProjection {
  std::vector<double> means;  // one per interior perforation, in lattice order
  double ld_error = 0.0;
};

/// Cube averages over x_i + (-d_k/2, d_k/2)^d for interior centers and the
/// L^1 distance between the step function sum |u_i|^d chi_i and |u|^d.
CubeProjection piecewise_mean_projection(const DiscreteField& u, const PerforationLattice& lattice);
/// Same for a sampled function, by Gauss quadrature.
CubeProjection piecewise_mean_projection(const TargetField& u, const PerforationLattice& lattice, int n = 128);

}  // namespace hetcap
