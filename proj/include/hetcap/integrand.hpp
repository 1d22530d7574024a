#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hetcap {

/// Lower and upper growth constants: alpha|xi|^d <= f(x, xi) <= beta|xi|^d.
struct GrowthBounds {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Symmetric 2x2 matrix.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
};

/// Values of a 2-D homogeneous density on equi-spaced unit directions
/// theta_k = 2 pi k / n, interpolated by a periodic cubic spline in angle.
class AngularTable {
 public:
  explicit AngularTable(std::vector<double> samples);

  double value(double theta) const;
  double slope(double theta) const;
  const std::vector<double>& samples() const { return y_; }
  std::size_t size() const { return y_.size(); }
  double angle(std::size_t k) const;

 private:
  std::vector<double> y_;
  std::vector<double> m_;  // spline second derivatives
  double step_;
};

/// x-independent density xi -> f(xi) in compact form. This is what an
/// integrand looks like once frozen at a point, and what the energy
/// functionals cache per quadrature cell.
struct Density {
  enum class Kind : std::uint8_t { Power, Quadratic, Table };

  Kind kind = Kind::Power;
  int d = 2;
  double c = 1.0;  // Power: c|xi|^d. Table: overall scale.
  Sym2 A{};        // Quadratic (d == 2): <A xi, xi>
  const AngularTable* table = nullptr;

  double value(const double* xi) const;
  void gradient(const double* xi, double* out) const;
  bool is_quadratic() const { return kind == Kind::Quadratic || (kind == Kind::Power && d == 2); }
};

/// Periodic, d-homogeneous, growth-bounded energy density f(x, xi).
///
/// Coefficient samplers receive x reduced into [0,1)^d coordinate-wise, so
/// periodicity is built in. Values are immutable after construction and all
/// evaluation methods are reentrant.
class Integrand {
 public:
  using ScalarSampler = std::function<double(std::span<const double>)>;
  using MatrixSampler = std::function<Sym2(std::span<const double>)>;

  struct ScalarCoefficient {
    ScalarSampler a;
  };
  struct QuadraticMatrix {
    MatrixSampler A;
  };
  struct HomogenizedTable {
    std::shared_ptr<const AngularTable> table;
  };
  struct Constant {
    double c;
  };
  using Model = std::variant<ScalarCoefficient, QuadraticMatrix, HomogenizedTable, Constant>;

  static Integrand constant(int d, double c);
  static Integrand scalar_coefficient(int d, ScalarSampler a, GrowthBounds bounds, std::string name);
  static Integrand quadratic_matrix(MatrixSampler A, GrowthBounds bounds, std::string name);
  // Tables handed in from outside are checked with the midpoint convexity
  // test and rejected with InputError on failure.
  static Integrand homogenized_table(std::vector<double> values, GrowthBounds bounds,
                                     std::string name = "fhom_table", bool check_convexity = true);

  int dim() const { return d_; }
  const GrowthBounds& bounds() const { return bounds_; }
  const std::string& name() const { return name_; }
  const Model& model() const { return model_; }
  double scale() const { return scale_; }
  bool x_independent() const;

  double evaluate(std::span<const double> x, std::span<const double> xi) const;
  void gradient_xi(std::span<const double> x, std::span<const double> xi, std::span<double> out) const;
  std::vector<double> gradient_xi(std::span<const double> x, std::span<const double> xi) const;

  /// The density xi -> f(x, xi) at a fixed point.
  Density density_at(std::span<const double> x) const;

  /// t * f, with bounds scaled accordingly.
  Integrand scaled(double t) const;

  /// xi -> f(z, xi) as an x-independent integrand; keeps the base bounds.
  Integrand frozen_at(std::span<const double> z) const;

 private:
  Integrand(int d, Model model, GrowthBounds bounds, std::string name);

  int d_;
  Model model_;
  GrowthBounds bounds_;
  std::string name_;
  double scale_ = 1.0;
  bool frozen_ = false;  // sampler known to be constant in x
};

/// f(z, .) seen as a function of xi only.
class FrozenIntegrand {
 public:
  FrozenIntegrand(const Integrand& base, std::span<const double> z);

  double evaluate(std::span<const double> x, std::span<const double> xi) const;
  const Integrand& base() const { return base_; }
  const std::vector<double>& point() const { return z_; }
  const Integrand& as_integrand() const { return frozen_; }
  int dim() const { return base_.dim(); }

 private:
  Integrand base_;
  std::vector<double> z_;
  Integrand frozen_;
};

struct AxiomReport {
  int samples = 0;
  double max_periodicity_defect = 0.0;
  double max_homogeneity_defect = 0.0;
  int growth_violations = 0;
  int convexity_violations = 0;
  std::vector<int> violating_samples;

  bool ok(double tol = 1e-10) const {
    return max_periodicity_defect <= tol && max_homogeneity_defect <= tol && growth_violations == 0 &&
           convexity_violations == 0;
  }
};

/// Samples (x, xi, t) and checks periodicity, homogeneity, the growth
/// sandwich and midpoint convexity.
AxiomReport verify_axioms(const Integrand& integrand, int n_samples, std::uint64_t seed);

/// Coordinate-wise floor-based reduction into [0,1).
std::vector<double> reduce_to_unit_cell(std::span<const double> x);

namespace presets {

Integrand constant(int d, double c = 1.0);
/// a(y) = 2 + sin(2 pi y_1), bounds [1, 3].
Integrand sinusoidal(int d);
/// a(y) = lo for y_1 < 1/2, hi otherwise.
Integrand laminate(int d, double lo = 1.0, double hi = 4.0);
/// a(y) = lo on the cells where (y_1 < 1/2) == (y_2 < 1/2), hi otherwise.
Integrand checkerboard(int d, double lo = 1.0, double hi = 4.0);

/// Preset lookup used by configuration files. Throws InputError for unknown names.
Integrand by_name(const std::string& name, int d, double c = 1.0);
std::vector<std::string> names();

}  // namespace presets

}  // namespace hetcap
