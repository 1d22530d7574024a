#include "hetcap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "hetcap/error.hpp"

namespace hetcap {

double Box::measure() const {
  double m = 1.0;
  for (int a = 0; a < dim(); ++a) m *= hi[a] - lo[a];
  return m;
}

Box Box::unit(int d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

struct GridBuilder {
  static std::shared_ptr<Grid> make() { return std::shared_ptr<Grid>(new Grid()); }
  static Grid& g(const std::shared_ptr<Grid>& p) { return *p; }

  // Q1 gradient at the cell center of an axis-aligned cell with edge lengths h.
  static std::vector<double> cartesian_op(const std::vector<double>& h) {
    const int d = static_cast<int>(h.size());
    const int nc = 1 << d;
    std::vector<double> op(static_cast<std::size_t>(d) * nc);
    const double w = 1.0 / static_cast<double>(1 << (d - 1));
    for (int a = 0; a < d; ++a) {
      for (int c = 0; c < nc; ++c) op[a * nc + c] = ((c >> a) & 1 ? w : -w) / h[a];
    }
    return op;
  }

  // Builds the Cartesian node/cell structure. With wrap, there are counts[a]
  // nodes per axis and cells wrap around; otherwise counts[a] + 1 nodes.
  static void cartesian(Grid& g, const std::vector<double>& lo, const std::vector<int>& cells_per_axis,
                        const std::vector<double>& h, bool wrap) {
    const int d = static_cast<int>(lo.size());
    g.d_ = d;
    CartesianLayout& L = g.cart_;
    L.lo = lo;
    L.h = h;
    L.counts.resize(d);
    L.stride.resize(d);
    std::size_t nn = 1;
    for (int a = 0; a < d; ++a) {
      L.counts[a] = wrap ? cells_per_axis[a] : cells_per_axis[a] + 1;
      L.stride[a] = nn;
      nn *= static_cast<std::size_t>(L.counts[a]);
    }
    g.coords_.resize(nn * d);
    std::vector<int> k(d, 0);
    for (std::size_t i = 0; i < nn; ++i) {
      std::size_t rem = i;
      for (int a = 0; a < d; ++a) {
        k[a] = static_cast<int>(rem % L.counts[a]);
        rem /= L.counts[a];
        g.coords_[i * d + a] = lo[a] + k[a] * h[a];
      }
    }
    g.fixed_.assign(nn, 0);
    g.fixed_value_.assign(nn, 0.0);

    std::size_t nc = 1;
    for (int a = 0; a < d; ++a) nc *= static_cast<std::size_t>(cells_per_axis[a]);
    if (nc > std::numeric_limits<std::uint32_t>::max() / (1u << d)) throw ResolutionError("grid too large");
    const int ncorner = 1 << d;
    g.ops_ = cartesian_op(h);
    g.cells_.resize(nc);
    g.centers_.resize(nc * d);
    g.corners_.resize(nc * ncorner);
    double meas = 1.0;
    double size = 0.0;
    for (int a = 0; a < d; ++a) {
      meas *= h[a];
      size = std::max(size, h[a]);
    }
    for (std::size_t c = 0; c < nc; ++c) {
      std::size_t rem = c;
      for (int a = 0; a < d; ++a) {
        k[a] = static_cast<int>(rem % cells_per_axis[a]);
        rem /= cells_per_axis[a];
        g.centers_[c * d + a] = lo[a] + (k[a] + 0.5) * h[a];
      }
      for (int corner = 0; corner < ncorner; ++corner) {
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) {
          int ka = k[a] + ((corner >> a) & 1);
          if (wrap && ka == L.counts[a]) ka = 0;
          idx += static_cast<std::size_t>(ka) * L.stride[a];
        }
        g.corners_[c * ncorner + corner] = static_cast<std::uint32_t>(idx);
      }
      g.cells_[c] = {static_cast<std::uint32_t>(c * ncorner), 0, meas, size};
    }
  }
};

// ---------------------------------------------------------------------------
// Grid

std::size_t Grid::num_free() const {
  return static_cast<std::size_t>(std::count(fixed_.begin(), fixed_.end(), std::uint8_t{0}));
}

double Grid::total_measure() const {
  double s = 0.0;
  for (const Cell& c : cells_) s += c.measure;
  return s;
}

std::shared_ptr<const Grid> Grid::with_dirichlet(std::span<const std::uint8_t> mask,
                                                 std::span<const double> values) const {
  if (mask.size() != num_nodes() || values.size() != num_nodes()) {
    throw InputError("Dirichlet mask size does not match the grid");
  }
  auto out = std::make_shared<Grid>(*this);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!std::isfinite(values[i])) throw InputError("Dirichlet values must be finite");
    out->fixed_[i] = 1;
    out->fixed_value_[i] = values[i];
  }
  out->zero_mean_ = zero_mean_ && out->num_free() == out->num_nodes();
  return out;
}

std::shared_ptr<const Grid> Grid::without_dirichlet() const {
  auto out = std::make_shared<Grid>(*this);
  std::fill(out->fixed_.begin(), out->fixed_.end(), std::uint8_t{0});
  std::fill(out->fixed_value_.begin(), out->fixed_value_.end(), 0.0);
  return out;
}

void Grid::dump(std::ostream& out) const {
  static const char* names[] = {"polar_annulus", "periodic_cell", "masked_box"};
  const auto old_prec = out.precision(17);
  out << "grid " << names[static_cast<int>(kind_)] << " d=" << d_ << " nodes=" << num_nodes()
      << " cells=" << num_cells() << " zero_mean=" << (zero_mean_ ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    out << "node " << i;
    for (double x : node(i)) out << ' ' << x;
    if (is_fixed(i)) out << " fixed " << fixed_value(i);
    out << '\n';
  }
  for (std::size_t c = 0; c < num_cells(); ++c) {
    out << "cell " << c << " measure " << cells_[c].measure << " corners";
    for (auto k : cell_corners(c)) out << ' ' << k;
    out << '\n';
  }
  out.precision(old_prec);
}

// ---------------------------------------------------------------------------
// DiscreteField

DiscreteField::DiscreteField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw InputError("field without grid");
  if (values.size() != grid->num_nodes()) throw InputError("field size does not match its grid");
}

DiscreteField DiscreteField::feasible(GridPtr g, double fill) {
  std::vector<double> v(g->num_nodes(), fill);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (g->is_fixed(i)) v[i] = g->fixed_value(i);
  }
  return DiscreteField(std::move(g), std::move(v));
}

bool DiscreteField::satisfies_constraints(double tol) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) return false;
    if (grid->is_fixed(i) && std::abs(values[i] - grid->fixed_value(i)) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Builders

GridPtr build_annulus_grid(const AnnulusSpec& spec, int n_radial, int n_angular, double inner_value,
                           double outer_value) {
  if (spec.center.size() != 2) throw InputError("polar annulus grids are two-dimensional");
  if (!(spec.r > 0.0) || !(spec.R > spec.r) || !std::isfinite(spec.R)) {
    throw InputError("annulus needs 0 < r < R");
  }
  if (n_radial < 4 || n_angular < 8) throw InputError("annulus grid needs n_radial >= 4 and n_angular >= 8");

  auto gp = GridBuilder::make();
  Grid& g = GridBuilder::g(gp);
  g.kind_ = GridKind::PolarAnnulus;
  g.d_ = 2;
  PolarLayout& P = g.polar_;
  P.n_radial = n_radial;
  P.n_angular = n_angular;
  P.center = spec.center;
  P.radii.resize(n_radial);
  const double L = std::log(spec.R / spec.r);
  for (int i = 0; i < n_radial; ++i) P.radii[i] = spec.r * std::exp(L * i / (n_radial - 1));
  P.radii.front() = spec.r;
  P.radii.back() = spec.R;

  const std::size_t nn = static_cast<std::size_t>(n_radial) * n_angular;
  const double dth = 2.0 * std::numbers::pi / n_angular;
  g.coords_.resize(2 * nn);
  g.fixed_.assign(nn, 0);
  g.fixed_value_.assign(nn, 0.0);
  for (int i = 0; i < n_radial; ++i) {
    for (int j = 0; j < n_angular; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n_angular + j;
      const double th = dth * j;
      g.coords_[2 * k] = spec.center[0] + P.radii[i] * std::cos(th);
      g.coords_[2 * k + 1] = spec.center[1] + P.radii[i] * std::sin(th);
      if (i == 0 || i == n_radial - 1) {
        g.fixed_[k] = 1;
        g.fixed_value_[k] = i == 0 ? inner_value : outer_value;
      }
    }
  }

  const std::size_t nc = static_cast<std::size_t>(n_radial - 1) * n_angular;
  g.cells_.resize(nc);
  g.centers_.resize(2 * nc);
  g.corners_.resize(4 * nc);
  g.ops_.resize(8 * nc);
  for (int i = 0; i + 1 < n_radial; ++i) {
    const double r0 = P.radii[i];
    const double r1 = P.radii[i + 1];
    const double ds = std::log(r1 / r0);
    const double rc = std::sqrt(r0 * r1);
    for (int j = 0; j < n_angular; ++j) {
      const std::size_t c = static_cast<std::size_t>(i) * n_angular + j;
      const int j1 = (j + 1) % n_angular;
      const double th = dth * (j + 0.5);
      const double ct = std::cos(th);
      const double st = std::sin(th);
      g.centers_[2 * c] = spec.center[0] + rc * ct;
      g.centers_[2 * c + 1] = spec.center[1] + rc * st;
      std::uint32_t* corner = g.corners_.data() + 4 * c;
      corner[0] = static_cast<std::uint32_t>(i * n_angular + j);
      corner[1] = static_cast<std::uint32_t>((i + 1) * n_angular + j);
      corner[2] = static_cast<std::uint32_t>(i * n_angular + j1);
      corner[3] = static_cast<std::uint32_t>((i + 1) * n_angular + j1);
      // u_s and u_theta as averaged edge differences in (log rho, theta)
      const double ws = 0.5 / ds / rc;
      const double wt = 0.5 / dth / rc;
      const double dus[4] = {-ws, ws, -ws, ws};
      const double dut[4] = {-wt, -wt, wt, wt};
      double* op = g.ops_.data() + 8 * c;
      for (int k = 0; k < 4; ++k) {
        op[k] = ct * dus[k] - st * dut[k];
        op[4 + k] = st * dus[k] + ct * dut[k];
      }
      const double meas = 0.5 * (r1 * r1 - r0 * r0) * dth;
      g.cells_[c] = {static_cast<std::uint32_t>(4 * c), static_cast<std::uint32_t>(c), meas,
                     std::max(r1 - r0, r1 * dth)};
    }
  }
  return gp;
}

GridPtr build_periodic_cell(int n, int d) {
  if (n < 4) throw InputError("periodic cell needs n >= 4");
  if (d < 2) throw InputError("periodic cell needs d >= 2");
  auto gp = GridBuilder::make();
  Grid& g = GridBuilder::g(gp);
  g.kind_ = GridKind::PeriodicCell;
  GridBuilder::cartesian(g, std::vector<double>(d, 0.0), std::vector<int>(d, n),
                         std::vector<double>(d, 1.0 / n), true);
  g.zero_mean_ = true;
  return gp;
}

GridPtr build_masked_box(const Box& box, double h, const std::vector<DirichletBall>& balls,
                         std::optional<double> outer_value) {
  const int d = box.dim();
  if (d < 2 || static_cast<int>(box.hi.size()) != d) throw InputError("box needs matching lo/hi of dimension >= 2");
  for (int a = 0; a < d; ++a) {
    if (!(box.hi[a] > box.lo[a])) throw InputError("box needs lo < hi on every axis");
  }
  if (!(h > 0.0)) throw InputError("grid spacing must be positive");

  std::vector<int> cells(d);
  std::vector<double> hh(d);
  double hmax = 0.0;
  double total = 1.0;
  for (int a = 0; a < d; ++a) {
    const double len = box.hi[a] - box.lo[a];
    cells[a] = std::max(2, static_cast<int>(std::lround(len / h)));
    hh[a] = len / cells[a];
    hmax = std::max(hmax, hh[a]);
    total *= cells[a] + 1.0;
  }
  if (total > 5e8) throw ResolutionError("masked box would need more than 5e8 nodes; increase h");

  for (const DirichletBall& b : balls) {
    if (static_cast<int>(b.center.size()) != d) throw InputError("ball center dimension does not match the box");
    if (!std::isfinite(b.value)) throw InputError("ball Dirichlet value must be finite");
    if (b.radius < 2.0 * hmax) {
      throw ResolutionError("ball of radius " + std::to_string(b.radius) + " is not resolved by spacing " +
                            std::to_string(hmax) + " (need radius >= 2h)");
    }
    double dist2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double q = std::clamp(b.center[a], box.lo[a], box.hi[a]);
      dist2 += (q - b.center[a]) * (q - b.center[a]);
    }
    if (dist2 >= b.radius * b.radius) throw InputError("ball does not meet the box");
  }

  auto gp = GridBuilder::make();
  Grid& g = GridBuilder::g(gp);
  g.kind_ = GridKind::MaskedBox;
  GridBuilder::cartesian(g, box.lo, cells, hh, false);

  const CartesianLayout& L = g.cart_;
  const std::size_t nn = g.fixed_.size();
  std::vector<int> k(d);
  for (std::size_t i = 0; i < nn; ++i) {
    std::size_t rem = i;
    bool boundary = false;
    for (int a = 0; a < d; ++a) {
      k[a] = static_cast<int>(rem % L.counts[a]);
      rem /= L.counts[a];
      if (k[a] == 0 || k[a] == L.counts[a] - 1) boundary = true;
    }
    if (boundary && outer_value) {
      g.fixed_[i] = 1;
      g.fixed_value_[i] = *outer_value;
    }
  }
  // Balls are stamped after the boundary so an inclusion touching the
  // boundary keeps its own value there.
  for (const DirichletBall& b : balls) {
    std::vector<int> kmin(d), kmax(d);
    for (int a = 0; a < d; ++a) {
      kmin[a] = std::max(0, static_cast<int>(std::floor((b.center[a] - b.radius - L.lo[a]) / hh[a])));
      kmax[a] = std::min(L.counts[a] - 1, static_cast<int>(std::ceil((b.center[a] + b.radius - L.lo[a]) / hh[a])));
    }
    std::vector<int> kk = kmin;
    const double r2 = b.radius * b.radius;
    while (true) {
      std::size_t idx = 0;
      double dist2 = 0.0;
      for (int a = 0; a < d; ++a) {
        idx += static_cast<std::size_t>(kk[a]) * L.stride[a];
        const double q = L.lo[a] + kk[a] * hh[a] - b.center[a];
        dist2 += q * q;
      }
      if (dist2 <= r2) {
        g.fixed_[idx] = 1;
        g.fixed_value_[idx] = b.value;
      }
      int a = 0;
      while (a < d && ++kk[a] > kmax[a]) {
        kk[a] = kmin[a];
        ++a;
      }
      if (a == d) break;
    }
  }
  return gp;
}

// ---------------------------------------------------------------------------
// Energy

EnergyFunctional::EnergyFunctional(GridPtr grid, const Integrand& integrand, EnergyOptions opts)
    : grid_(std::move(grid)) {
  if (!grid_) throw InputError("energy functional needs a grid");
  const int d = grid_->dim();
  if (integrand.dim() != d) throw InputError("integrand dimension does not match the grid");
  if (d > 3) throw InputError("discrete energies are implemented for d <= 3");
  if (!(opts.delta > 0.0)) throw InputError("delta must be positive");
  if (!opts.macro_gradient.empty()) {
    if (static_cast<int>(opts.macro_gradient.size()) != d) throw InputError("macro gradient has wrong dimension");
    macro_ = opts.macro_gradient;
  }
  if (opts.far_field && opts.far_field->dim() != d) throw InputError("far-field integrand has wrong dimension");

  keep_.push_back(integrand);
  if (opts.far_field) keep_.push_back(*opts.far_field);
  const Integrand& base = keep_[0];
  const Integrand* far = opts.far_field ? &keep_[1] : nullptr;
  const double limit = opts.delta / opts.resolve_ratio;

  const std::size_t nc = grid_->num_cells();
  density_.resize(nc);
  std::vector<double> y(d);
  // x-independent integrands need a single density
  const bool uniform = base.x_independent();
  Density uniform_density;
  if (uniform) uniform_density = base.density_at(std::vector<double>(d, 0.0));
  Density far_density;
  if (far) far_density = far->density_at(std::vector<double>(d, 0.0));
  for (std::size_t c = 0; c < nc; ++c) {
    if (far && grid_->cell(c).size > limit) {
      density_[c] = far_density;
      ++far_cells_;
    } else if (uniform) {
      density_[c] = uniform_density;
    } else {
      const auto xc = grid_->cell_center(c);
      for (int a = 0; a < d; ++a) y[a] = xc[a] / opts.delta;
      density_[c] = base.density_at(y);
    }
    if (!density_[c].is_quadratic()) quadratic_ = false;
  }
}

double EnergyFunctional::cell_energy(std::size_t c, std::span<const double> u, bool with_macro,
                                     double* grad_out) const {
  const Grid& g = *grid_;
  const int d = g.dim();
  const int nc = g.corners_per_cell();
  const auto corners = g.cell_corners(c);
  const double* op = g.gradient_op(c);
  double xi[8];
  double uc[8];
  for (int k = 0; k < nc; ++k) uc[k] = u[corners[k]];
  for (int a = 0; a < d; ++a) {
    double s = with_macro && !macro_.empty() ? macro_[a] : 0.0;
    const double* row = op + a * nc;
    for (int k = 0; k < nc; ++k) s += row[k] * uc[k];
    xi[a] = s;
  }
  const Density& dens = density_[c];
  const double m = g.cell(c).measure;
  if (grad_out) {
    double df[8];
    dens.gradient(xi, df);
    for (int k = 0; k < nc; ++k) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += op[a * nc + k] * df[a];
      grad_out[k] = m * s;
    }
  }
  return m * dens.value(xi);
}

double EnergyFunctional::energy(std::span<const double> u) const {
  if (u.size() != grid_->num_nodes()) throw InputError("field size does not match the grid");
  double e = 0.0;
  for (std::size_t c = 0; c < grid_->num_cells(); ++c) e += cell_energy(c, u, true, nullptr);
  return e;
}

double EnergyFunctional::energy_and_gradient(std::span<const double> u, std::span<double> grad) const {
  const Grid& g = *grid_;
  if (u.size() != g.num_nodes() || grad.size() != g.num_nodes()) throw InputError("field size does not match the grid");
  std::fill(grad.begin(), grad.end(), 0.0);
  double e = 0.0;
  double local[8];
  const int nc = g.corners_per_cell();
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    e += cell_energy(c, u, true, local);
    const auto corners = g.cell_corners(c);
    for (int k = 0; k < nc; ++k) grad[corners[k]] += local[k];
  }
  project(grad);
  return e;
}

void EnergyFunctional::project(std::span<double> g) const {
  const Grid& gr = *grid_;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gr.is_fixed(i)) g[i] = 0.0;
  }
  if (gr.zero_mean()) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    for (double& v : g) v -= mean;
  }
}

double EnergyFunctional::quadratic_form(std::span<const double> p) const {
  double e = 0.0;
  for (std::size_t c = 0; c < grid_->num_cells(); ++c) e += cell_energy(c, p, false, nullptr);
  return e;
}

std::vector<double> EnergyFunctional::cell_energies(std::span<const double> u) const {
  std::vector<double> out(grid_->num_cells());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = cell_energy(c, u, true, nullptr);
  return out;
}

double EnergyFunctional::energy_on(std::span<const double> u, std::span<const std::uint32_t> cells) const {
  double e = 0.0;
  for (auto c : cells) e += cell_energy(c, u, true, nullptr);
  return e;
}

double discrete_energy(const DiscreteField& u, const Integrand& integrand, double delta) {
  EnergyOptions o;
  o.delta = delta;
  return EnergyFunctional(u.grid, integrand, o).energy(u.values);
}

DiscreteField energy_gradient(const DiscreteField& u, const Integrand& integrand, double delta) {
  EnergyOptions o;
  o.delta = delta;
  EnergyFunctional E(u.grid, integrand, o);
  std::vector<double> g(u.values.size());
  E.energy_and_gradient(u.values, g);
  return DiscreteField(u.grid, std::move(g));
}

}  // namespace hetcap
