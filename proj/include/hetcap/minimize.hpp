#pragma once

#include <vector>

#include "hetcap/grid.hpp"

namespace hetcap {

struct SolveOptions {
  int max_iterations = 0;  // 0: 20 sqrt(free nodes) + 500
  double grad_tol = 0.0;   // 0: 1e-8 (|g0| + 1)
  double energy_tol = 1e-12;
  bool clamp01 = false;    // truncate the result to [0,1] when that lowers the energy
  bool keep_history = false;
};

struct MinimizeResult {
  DiscreteField field;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // energies per accepted iterate, when requested
};

/// Nonlinear conjugate gradients (Polak-Ribiere+) on the free nodal values.
/// Quadratic energies get the exact step; others a safeguarded secant search
/// on the directional derivative with a backtracking fallback.
MinimizeResult minimize_energy(const EnergyFunctional& energy, const DiscreteField& u0, const SolveOptions& opts = {});
MinimizeResult minimize_energy(GridPtr grid, const Integrand& integrand, double delta, const DiscreteField& u0,
                               const SolveOptions& opts = {});

/// Pointwise truncation to [0,1].
DiscreteField clamp01(const DiscreteField& u);

}  // namespace hetcap
