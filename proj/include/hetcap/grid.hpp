#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetcap/integrand.hpp"

namespace hetcap {

struct AnnulusSpec {
  std::vector<double> center{0.0, 0.0};
  double r = 1.0;
  double R = 2.0;
};

/// Axis-aligned box [lo, hi].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double measure() const;
  static Box unit(int d);
};

struct DirichletBall {
  std::vector<double> center;
  double radius = 0.0;
  double value = 0.0;
};

enum class GridKind : std::uint8_t { PolarAnnulus, PeriodicCell, MaskedBox };

/// Polar bookkeeping. Node (i, j) has index i * n_angular + j, ring i at
/// radius radii[i].
struct PolarLayout {
  int n_radial = 0;
  int n_angular = 0;
  std::vector<double> radii;
  std::vector<double> center;
};

/// Cartesian bookkeeping. Node multi-index (k_0, ..., k_{d-1}) has flat index
/// sum k_a * stride[a]; coordinate lo[a] + k_a * h[a].
struct CartesianLayout {
  std::vector<int> counts;
  std::vector<std::size_t> stride;
  std::vector<double> lo;
  std::vector<double> h;
};

/// One quadrature cell: 2^d corner nodes (bit a of the corner number set means
/// the +1 side along axis a), center point, measure and a gradient operator.
struct Cell {
  std::uint32_t corner_offset = 0;  // into Grid::corners
  std::uint32_t op = 0;             // into Grid::ops
  double measure = 0.0;
  double size = 0.0;  // largest edge length, used to decide coefficient resolution
};

/// Immutable discrete domain. Nodes carry coordinates and an optional
/// Dirichlet value; cells carry the quadrature data.
class Grid {
 public:
  GridKind kind() const { return kind_; }
  int dim() const { return d_; }
  std::size_t num_nodes() const { return fixed_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  int corners_per_cell() const { return 1 << d_; }

  std::span<const double> node(std::size_t i) const { return {coords_.data() + i * d_, static_cast<std::size_t>(d_)}; }
  std::span<const double> cell_center(std::size_t c) const {
    return {centers_.data() + c * d_, static_cast<std::size_t>(d_)};
  }
  const Cell& cell(std::size_t c) const { return cells_[c]; }
  std::span<const std::uint32_t> cell_corners(std::size_t c) const {
    return {corners_.data() + cells_[c].corner_offset, static_cast<std::size_t>(corners_per_cell())};
  }
  /// Row-major dim x 2^d weights: grad_a = sum_c op[a][c] * u[corner c].
  const double* gradient_op(std::size_t c) const { return ops_.data() + cells_[c].op * d_ * corners_per_cell(); }

  bool is_fixed(std::size_t i) const { return fixed_[i] != 0; }
  double fixed_value(std::size_t i) const { return fixed_value_[i]; }
  std::size_t num_free() const;
  bool zero_mean() const { return zero_mean_; }
  double total_measure() const;

  const PolarLayout* polar() const { return kind_ == GridKind::PolarAnnulus ? &polar_ : nullptr; }
  const CartesianLayout* cartesian() const { return kind_ == GridKind::PolarAnnulus ? nullptr : &cart_; }

  /// Copy with additional Dirichlet nodes. Entries with mask != 0 become
  /// fixed at the given value; existing constraints are kept otherwise.
  std::shared_ptr<const Grid> with_dirichlet(std::span<const std::uint8_t> mask, std::span<const double> values) const;
  /// Copy with every constraint removed (used for recovery fields that are
  /// assembled rather than minimized).
  std::shared_ptr<const Grid> without_dirichlet() const;

  /// Plain-text dump: header line, then one line per node and per cell.
  void dump(std::ostream& out) const;

 private:
  friend struct GridBuilder;
  friend std::shared_ptr<const Grid> build_annulus_grid(const AnnulusSpec&, int, int, double, double);
  friend std::shared_ptr<const Grid> build_periodic_cell(int, int);
  friend std::shared_ptr<const Grid> build_masked_box(const Box&, double, const std::vector<DirichletBall>&,
                                                      std::optional<double>);

  GridKind kind_ = GridKind::MaskedBox;
  int d_ = 2;
  std::vector<double> coords_;
  std::vector<std::uint8_t> fixed_;
  std::vector<double> fixed_value_;
  std::vector<Cell> cells_;
  std::vector<double> centers_;
  std::vector<std::uint32_t> corners_;
  std::vector<double> ops_;
  bool zero_mean_ = false;
  PolarLayout polar_;
  CartesianLayout cart_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Nodal values on a grid.
struct DiscreteField {
  GridPtr grid;
  std::vector<double> values;

  DiscreteField() = default;
  DiscreteField(GridPtr g, std::vector<double> v);
  /// Free nodes get `fill`, constrained nodes their Dirichlet value.
  static DiscreteField feasible(GridPtr g, double fill = 0.0);
  /// Samples u at every node, then overwrites constrained nodes.
  template <class F>
  static DiscreteField sample(GridPtr g, F&& u) {
    std::vector<double> v(g->num_nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g->is_fixed(i) ? g->fixed_value(i) : u(g->node(i));
    return DiscreteField(std::move(g), std::move(v));
  }

  bool satisfies_constraints(double tol = 0.0) const;
};

/// Log-spaced polar annulus (d = 2). Inner ring fixed at inner_value, outer
/// ring at outer_value.
GridPtr build_annulus_grid(const AnnulusSpec& spec, int n_radial, int n_angular, double inner_value = 1.0,
                           double outer_value = 0.0);

/// n^d nodes on [0,1)^d with wrap-around, zero-mean flag set.
GridPtr build_periodic_cell(int n, int d);

/// Cartesian box with spacing close to h (the box is split into whole cells
/// per axis). Nodes within a ball are fixed at the ball's value; with
/// outer_value set, boundary nodes are fixed too. A ball may stick out of the
/// box but must meet it.
GridPtr build_masked_box(const Box& box, double h, const std::vector<DirichletBall>& balls,
                         std::optional<double> outer_value);

/// Options for the discrete energy.
struct EnergyOptions {
  double delta = 1.0;                     // coefficients sampled at x / delta
  std::vector<double> macro_gradient;     // added to every cell gradient (cell problems)
  std::optional<Integrand> far_field;     // used on cells coarser than delta / resolve_ratio
  double resolve_ratio = 8.0;
};

/// Midpoint-rule discretization of u -> sum_cells |cell| f(x_c / delta, grad_h u).
/// Densities are frozen per cell at construction, so evaluation is cheap and
/// reentrant.
class EnergyFunctional {
 public:
  EnergyFunctional(GridPtr grid, const Integrand& integrand, EnergyOptions opts = {});

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool quadratic() const { return quadratic_; }
  bool has_macro() const { return !macro_.empty(); }
  std::size_t far_field_cells() const { return far_cells_; }

  double energy(std::span<const double> u) const;
  /// Energy and gradient w.r.t. nodal values. Constrained entries are zero and
  /// zero-mean grids get the mean-free projection.
  double energy_and_gradient(std::span<const double> u, std::span<double> grad) const;
  /// Energy of the bare increment p with the macro gradient switched off. For
  /// quadratic densities E(u + t p) = E(u) + t <g, p> + t^2 Q(p).
  double quadratic_form(std::span<const double> p) const;
  /// Per-cell energies.
  std::vector<double> cell_energies(std::span<const double> u) const;
  /// Energy restricted to the listed cells.
  double energy_on(std::span<const double> u, std::span<const std::uint32_t> cells) const;

  void project(std::span<double> g) const;

 private:
  double cell_energy(std::size_t c, std::span<const double> u, bool with_macro, double* grad_out) const;

  GridPtr grid_;
  std::vector<Integrand> keep_;  // owners of any table referenced by density_
  std::vector<Density> density_;
  std::vector<double> macro_;
  bool quadratic_ = true;
  std::size_t far_cells_ = 0;
};

double discrete_energy(const DiscreteField& u, const Integrand& integrand, double delta);
DiscreteField energy_gradient(const DiscreteField& u, const Integrand& integrand, double delta);

}  // namespace hetcap
