#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetcap/capacity.hpp"
#include "hetcap/grid.hpp"
#include "hetcap/integrand.hpp"
#include "hetcap/minimize.hpp"

namespace hetcap {

struct TwoWell {
  double x_star = 0.0;
  double value = 0.0;
};

/// Minimum of a|1-x|^d + b|x|^d over x.
TwoWell scalar_two_well_min(double a, double b, int d);

/// phi C [lambda phi^{1/(d-1)} + (1-lambda) C^{1/(d-1)}]^{1-d}.
double c_lambda(double phi, double chom, double lambda, int d);

/// (d, eps, lambda) with delta = eps^lambda, or 1/|log eps| when lambda = 0.
struct AsymptoticParams {
  int d = 2;
  double eps = 0.0;
  double lambda = 0.0;
  double delta = 0.0;

  static AsymptoticParams make(int d, double eps, double lambda);
  /// Explicit delta, for experiments that need their own coupling.
  static AsymptoticParams with_delta(int d, double eps, double lambda, double delta);
};

/// Realized inclusion center delta (z + i) with the lattice offset i chosen so
/// the center is nearest the middle of the box.
struct CenterFamily {
  std::vector<double> z;
  std::vector<double> offset;
  std::vector<double> center;
  double clearance = 0.0;  // distance from center to the box boundary

  static CenterFamily realize(const Box& omega, std::span<const double> z, double delta);
};

enum class MuMethod { CenteredPolar, MaskedBox };

struct MuResolution {
  MuMethod method = MuMethod::CenteredPolar;
  int n_angular = 256;     // CenteredPolar: log cells are made square
  double h = 0.0;          // MaskedBox: 0 means min(eps/4, delta/8)
  std::optional<Integrand> far_field;  // homogenized density on cells coarser than delta/8
  SolveOptions solve{};
};

struct MuResult {
  double value = 0.0;
  double rescaled = 0.0;  // |log eps|^{d-1} * value
  std::vector<double> center;
  std::size_t nodes = 0;
  std::size_t far_cells = 0;
  int iterations = 0;
  bool converged = false;
};

/// min of the heterogeneous energy over u = 0 on the box boundary and u = 1 on
/// B(z_eps, eps).
MuResult mu_eps_delta(const Integrand& f, const Box& omega, std::span<const double> z, const AsymptoticParams& p,
                      const MuResolution& res = {});

struct MEpsDelta {
  std::vector<double> best_z;
  double value = 0.0;
  std::vector<double> per_candidate;
};

MEpsDelta m_eps_delta(const Integrand& f, const Box& omega, const std::vector<std::vector<double>>& candidates,
                      const AsymptoticParams& p, const MuResolution& res = {});

/// Geometric factor s = min(|log eps| / log(R_out/eps), log(r_in/eps) / |log eps|)^{d-1}
/// from the balls inscribed in and circumscribing the box around the center.
double sandwich_factor(const Box& omega, std::span<const double> center, double eps, int d);

struct LawRow {
  double eps = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  double rescaled = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool sandwiched = false;
};

struct LawReport {
  double lambda = 0.0;
  double phi = 0.0;
  double chom = 0.0;
  double prediction = 0.0;
  std::vector<LawRow> rows;
  bool sandwiched = false;
  bool trend = false;  // last rescaled value strictly closer to the prediction than the first
  bool pass = false;
};

/// Estimates of Phi(z) and C_hom feeding the prediction of the sweep.
struct LawConstants {
  double phi = 0.0;
  double chom = 0.0;
  std::optional<Integrand> fhom;       // tabulated homogenized density
  std::optional<Integrand> far_field;  // exact quadratic f_hom when f is quadratic, else the table
};

LawConstants estimate_law_constants(const Integrand& f, std::span<const double> z, int n_directions = 64,
                                    int cell_n = 64, const std::vector<double>& schedule = default_schedule(),
                                    const PolarResolution& res = {});

LawReport law_sweep(const Integrand& f, const Box& omega, std::span<const double> z, double lambda,
                    const std::vector<double>& eps_schedule, const LawConstants& constants,
                    const MuResolution& res = {});

}  // namespace hetcap
