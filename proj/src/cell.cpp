#include "hetcap/cell.hpp"

#include <cmath>
#include <numbers>

#include "hetcap/error.hpp"
#include "hetcap/parallel.hpp"

namespace hetcap {

namespace {

bool even_in_xi(const Integrand& f) {
  return !std::holds_alternative<Integrand::HomogenizedTable>(f.model());
}

}  // namespace

CellSolution solve_cell_problem(const Integrand& f, std::span<const double> xi, int n, const SolveOptions& opts) {
  const int d = f.dim();
  if (static_cast<int>(xi.size()) != d) throw InputError("macro gradient dimension does not match the integrand");
  if (n < 8) throw InputError("cell problem needs n >= 8");
  GridPtr g = build_periodic_cell(n, d);

  CellSolution out;
  out.xi.assign(xi.begin(), xi.end());
  double norm = 0.0;
  for (double v : xi) norm += v * v;
  if (norm == 0.0) {
    out.corrector = DiscreteField::feasible(g, 0.0);
    out.converged = true;
    return out;
  }

  EnergyOptions eo;
  eo.macro_gradient = out.xi;
  EnergyFunctional E(g, f, eo);
  SolveOptions so = opts;
  MinimizeResult m = minimize_energy(E, DiscreteField::feasible(g, 0.0), so);
  // remove the mean picked up by rounding
  double mean = 0.0;
  for (double v : m.field.values) mean += v;
  mean /= static_cast<double>(m.field.values.size());
  for (double& v : m.field.values) v -= mean;

  out.fhom_value = m.energy;
  out.corrector = std::move(m.field);
  out.iterations = m.iterations;
  out.converged = m.converged;
  if (!out.converged) throw NumericalError("cell problem did not converge");
  return out;
}

double cell_average(const Integrand& f, std::span<const double> xi, int n) {
  const int d = f.dim();
  if (static_cast<int>(xi.size()) != d) throw InputError("macro gradient dimension does not match the integrand");
  GridPtr g = build_periodic_cell(n, d);
  EnergyOptions eo;
  eo.macro_gradient.assign(xi.begin(), xi.end());
  return EnergyFunctional(g, f, eo).energy(std::vector<double>(g->num_nodes(), 0.0));
}

Integrand tabulate_fhom(const Integrand& f, int n_directions, int n, const SolveOptions& opts) {
  if (f.dim() != 2) throw InputError("f_hom tables are two-dimensional");
  if (n_directions < 8) throw InputError("need at least 8 directions");
  const bool symmetric = even_in_xi(f) && n_directions % 2 == 0;
  const int solves = symmetric ? n_directions / 2 : n_directions;
  const double step = 2.0 * std::numbers::pi / n_directions;
  auto values = parallel_map(static_cast<std::size_t>(solves), [&](std::size_t k) {
    const double th = step * static_cast<double>(k);
    const double xi[2] = {std::cos(th), std::sin(th)};
    return solve_cell_problem(f, xi, n, opts).fhom_value;
  });
  std::vector<double> table(n_directions);
  for (int k = 0; k < n_directions; ++k) table[k] = values[symmetric ? k % solves : k];
  try {
    return Integrand::homogenized_table(std::move(table), f.bounds(), f.name() + "_hom", true);
  } catch (const InputError& e) {
    throw NumericalError(std::string("tabulated f_hom is not convex (under-resolved cell solves?): ") + e.what());
  }
}

HomogenizedMatrix quadratic_homogenized_matrix(const Integrand& f, int n, const SolveOptions& opts) {
  if (f.dim() != 2) throw InputError("homogenized matrix needs d = 2");
  const bool quadratic = std::holds_alternative<Integrand::QuadraticMatrix>(f.model()) ||
                         std::holds_alternative<Integrand::ScalarCoefficient>(f.model()) ||
                         std::holds_alternative<Integrand::Constant>(f.model());
  if (!quadratic) throw InputError("homogenized matrix needs a quadratic model");
  const double dirs[3][2] = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  auto v = parallel_map(3, [&](std::size_t k) { return solve_cell_problem(f, dirs[k], n, opts).fhom_value; });
  HomogenizedMatrix out;
  out.A = {v[0], 0.5 * (v[2] - v[0] - v[1]), v[1]};
  const double det = out.A.det();
  if (!(out.A.xx > 0.0) || !(det > 0.0)) throw NumericalError("recovered homogenized matrix is not positive definite");
  out.sqrt_det = std::sqrt(det);
  return out;
}

CorrectorSet::CorrectorSet(const Integrand& f, int n, const SolveOptions& opts) : d_(f.dim()), n_(n) {
  auto sols = parallel_map(static_cast<std::size_t>(d_), [&](std::size_t j) {
    std::vector<double> e(d_, 0.0);
    e[j] = 1.0;
    return solve_cell_problem(f, e, n, opts).corrector.values;
  });
  fields_ = std::move(sols);
}

double CorrectorSet::value(int j, std::span<const double> y) const {
  if (fields_.empty()) return 0.0;
  if (static_cast<int>(y.size()) != d_) throw InputError("corrector point has wrong dimension");
  const std::vector<double>& phi = fields_[j];
  int base[3];
  double frac[3];
  for (int a = 0; a < d_; ++a) {
    double t = (y[a] - std::floor(y[a])) * n_;
    int k = static_cast<int>(t);
    if (k >= n_) k = n_ - 1;
    base[a] = k;
    frac[a] = t - k;
  }
  double s = 0.0;
  for (int c = 0; c < (1 << d_); ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int a = 0; a < d_; ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      idx += static_cast<std::size_t>((base[a] + bit) % n_) * stride;
      stride *= static_cast<std::size_t>(n_);
    }
    s += w * phi[idx];
  }
  return s;
}

}  // namespace hetcap
