#pragma once

#include <vector>

#include "hetcap/grid.hpp"
#include "hetcap/integrand.hpp"
#include "hetcap/minimize.hpp"

namespace hetcap {

struct CellSolution {
  std::vector<double> xi;
  double fhom_value = 0.0;
  DiscreteField corrector;  // zero mean on the periodic cell
  int iterations = 0;
  bool converged = false;
};

/// f_hom(xi) = min over zero-mean periodic phi of the cell energy of xi + grad phi.
CellSolution solve_cell_problem(const Integrand& f, std::span<const double> xi, int n, const SolveOptions& opts = {});

/// Cell energy of the zero corrector, i.e. the midpoint average of f(., xi).
double cell_average(const Integrand& f, std::span<const double> xi, int n);

/// f_hom on n_directions equi-spaced unit directions (d = 2), as a homogenized
/// table with the growth bounds of f.
Integrand tabulate_fhom(const Integrand& f, int n_directions, int n, const SolveOptions& opts = {});

struct HomogenizedMatrix {
  Sym2 A;
  double sqrt_det = 0.0;
};

/// A_hom from cell solves at e1, e2 and e1 + e2 (quadratic models, d = 2).
HomogenizedMatrix quadratic_homogenized_matrix(const Integrand& f, int n, const SolveOptions& opts = {});

/// Periodic corrector fields for xi = e_1 .. e_d, interpolated multilinearly.
class CorrectorSet {
 public:
  CorrectorSet() = default;
  CorrectorSet(const Integrand& f, int n, const SolveOptions& opts = {});

  bool empty() const { return fields_.empty(); }
  int dim() const { return d_; }
  /// phi_{e_j}(y) for a point y in R^d (reduced modulo 1).
  double value(int j, std::span<const double> y) const;

 private:
  int d_ = 0;
  int n_ = 0;
  std::vector<std::vector<double>> fields_;
};

}  // namespace hetcap
