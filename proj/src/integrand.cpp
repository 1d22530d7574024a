#include "hetcap/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hetcap/error.hpp"

namespace hetcap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// |xi|^d from |xi|^2 without a pow call for the common dimensions.
double power_from_sq(double r2, int d) {
  switch (d) {
    case 2: return r2;
    case 3: return r2 * std::sqrt(r2);
    case 4: return r2 * r2;
    default: return std::pow(r2, 0.5 * d);
  }
}

void check_dims(int d, std::span<const double> x, std::span<const double> xi) {
  if (static_cast<int>(x.size()) != d || static_cast<int>(xi.size()) != d) {
    throw InputError("integrand of dimension " + std::to_string(d) + " evaluated with x of size " +
                     std::to_string(x.size()) + " and xi of size " + std::to_string(xi.size()));
  }
}

void check_bounds(const GrowthBounds& b) {
  if (!(b.alpha > 0.0) || !(b.beta >= b.alpha) || !std::isfinite(b.beta)) {
    throw InputError("growth bounds need 0 < alpha <= beta");
  }
}

// Solves the cyclic system m[k-1] + 4 m[k] + m[k+1] = rhs[k] (Sherman-Morrison
// on top of the Thomas algorithm).
std::vector<double> solve_cyclic_spline(const std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  // Tridiagonal part with modified corners: gamma = -b[0].
  const double b0 = 4.0;
  const double gamma = -b0;
  std::vector<double> diag(n, 4.0);
  diag[0] = b0 - gamma;
  diag[n - 1] = 4.0 - 1.0 * 1.0 / gamma;

  auto thomas = [&](std::vector<double> d) {
    std::vector<double> c(n, 0.0);
    std::vector<double> bb = diag;
    c[0] = 1.0 / bb[0];
    d[0] /= bb[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = bb[i] - c[i - 1];
      c[i] = 1.0 / m;
      d[i] = (d[i] - d[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
  };

  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = 1.0;
  const std::vector<double> x = thomas(rhs);
  const std::vector<double> z = thomas(u);
  const double fact = (x[0] + x[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = x[i] - fact * z[i];
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// AngularTable

AngularTable::AngularTable(std::vector<double> samples) : y_(std::move(samples)) {
  if (y_.size() < 8) throw InputError("angular table needs at least 8 directions");
  for (double v : y_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("angular table values must be positive and finite");
  }
  const std::size_t n = y_.size();
  step_ = kTwoPi / static_cast<double>(n);
  std::vector<double> rhs(n);
  const double scale = 6.0 / (step_ * step_);
  for (std::size_t k = 0; k < n; ++k) {
    rhs[k] = scale * (y_[(k + 1) % n] - 2.0 * y_[k] + y_[(k + n - 1) % n]);
  }
  m_ = solve_cyclic_spline(rhs);
}

double AngularTable::angle(std::size_t k) const { return step_ * static_cast<double>(k); }

double AngularTable::value(double theta) const {
  const std::size_t n = y_.size();
  double t = theta / step_;
  t -= std::floor(t / static_cast<double>(n)) * static_cast<double>(n);
  std::size_t k = static_cast<std::size_t>(t);
  if (k >= n) k = n - 1;
  const double a = t - static_cast<double>(k);
  const double b = 1.0 - a;
  const std::size_t k1 = (k + 1) % n;
  return b * y_[k] + a * y_[k1] + step_ * step_ / 6.0 * ((b * b * b - b) * m_[k] + (a * a * a - a) * m_[k1]);
}

double AngularTable::slope(double theta) const {
  const std::size_t n = y_.size();
  double t = theta / step_;
  t -= std::floor(t / static_cast<double>(n)) * static_cast<double>(n);
  std::size_t k = static_cast<std::size_t>(t);
  if (k >= n) k = n - 1;
  const double a = t - static_cast<double>(k);
  const double b = 1.0 - a;
  const std::size_t k1 = (k + 1) % n;
  return (y_[k1] - y_[k]) / step_ + step_ / 6.0 * (-(3.0 * b * b - 1.0) * m_[k] + (3.0 * a * a - 1.0) * m_[k1]);
}

// ---------------------------------------------------------------------------
// Density

double Density::value(const double* xi) const {
  switch (kind) {
    case Kind::Power: {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) r2 += xi[k] * xi[k];
      return c * power_from_sq(r2, d);
    }
    case Kind::Quadratic:
      return A.xx * xi[0] * xi[0] + 2.0 * A.xy * xi[0] * xi[1] + A.yy * xi[1] * xi[1];
    case Kind::Table: {
      const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
      if (r2 == 0.0) return 0.0;
      return c * r2 * table->value(std::atan2(xi[1], xi[0]));
    }
  }
  return 0.0;
}

void Density::gradient(const double* xi, double* out) const {
  switch (kind) {
    case Kind::Power: {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) r2 += xi[k] * xi[k];
      // d c |xi|^{d-2} xi; zero at xi = 0 since d >= 2
      const double w = d == 2 ? 2.0 * c : d * c * power_from_sq(r2, d - 2);
      for (int k = 0; k < d; ++k) out[k] = w * xi[k];
      return;
    }
    case Kind::Quadratic:
      out[0] = 2.0 * (A.xx * xi[0] + A.xy * xi[1]);
      out[1] = 2.0 * (A.xy * xi[0] + A.yy * xi[1]);
      return;
    case Kind::Table: {
      const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
      if (r2 == 0.0) {
        out[0] = out[1] = 0.0;
        return;
      }
      const double th = std::atan2(xi[1], xi[0]);
      const double g = table->value(th);
      const double gp = table->slope(th);
      out[0] = c * (2.0 * g * xi[0] - gp * xi[1]);
      out[1] = c * (2.0 * g * xi[1] + gp * xi[0]);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Integrand

Integrand::Integrand(int d, Model model, GrowthBounds bounds, std::string name)
    : d_(d), model_(std::move(model)), bounds_(bounds), name_(std::move(name)) {
  if (d_ < 2) throw InputError("integrand dimension must be >= 2");
  check_bounds(bounds_);
}

Integrand Integrand::constant(int d, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("constant coefficient must be positive");
  return Integrand(d, Constant{c}, {c, c}, "constant");
}

Integrand Integrand::scalar_coefficient(int d, ScalarSampler a, GrowthBounds bounds, std::string name) {
  if (!a) throw InputError("scalar coefficient sampler is empty");
  return Integrand(d, ScalarCoefficient{std::move(a)}, bounds, std::move(name));
}

Integrand Integrand::quadratic_matrix(MatrixSampler A, GrowthBounds bounds, std::string name) {
  if (!A) throw InputError("matrix sampler is empty");
  return Integrand(2, QuadraticMatrix{std::move(A)}, bounds, std::move(name));
}

Integrand Integrand::homogenized_table(std::vector<double> values, GrowthBounds bounds, std::string name,
                                       bool check_convexity) {
  auto table = std::make_shared<const AngularTable>(std::move(values));
  Integrand out(2, HomogenizedTable{std::move(table)}, bounds, std::move(name));
  if (check_convexity) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double zero[2] = {0.0, 0.0};
    for (int s = 0; s < 4000; ++s) {
      const double a[2] = {normal(rng), normal(rng)};
      const double b[2] = {normal(rng), normal(rng)};
      const double m[2] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
      const double fa = out.evaluate(zero, a);
      const double fb = out.evaluate(zero, b);
      const double fm = out.evaluate(zero, m);
      if (fm > 0.5 * (fa + fb) * (1.0 + 1e-9) + 1e-14) {
        throw InputError("homogenized table '" + out.name_ + "' fails the midpoint convexity test");
      }
    }
  }
  return out;
}

bool Integrand::x_independent() const {
  return frozen_ || std::holds_alternative<HomogenizedTable>(model_) || std::holds_alternative<Constant>(model_);
}

Density Integrand::density_at(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw InputError("point dimension does not match integrand");
  Density out;
  out.d = d_;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Constant>) {
          out.kind = Density::Kind::Power;
          out.c = scale_ * m.c;
        } else if constexpr (std::is_same_v<T, ScalarCoefficient>) {
          const std::vector<double> y = reduce_to_unit_cell(x);
          out.kind = Density::Kind::Power;
          out.c = scale_ * m.a(y);
        } else if constexpr (std::is_same_v<T, QuadraticMatrix>) {
          const std::vector<double> y = reduce_to_unit_cell(x);
          const Sym2 A = m.A(y);
          out.kind = Density::Kind::Quadratic;
          out.A = {scale_ * A.xx, scale_ * A.xy, scale_ * A.yy};
        } else {
          out.kind = Density::Kind::Table;
          out.c = scale_;
          out.table = m.table.get();
        }
      },
      model_);
  return out;
}

double Integrand::evaluate(std::span<const double> x, std::span<const double> xi) const {
  check_dims(d_, x, xi);
  return density_at(x).value(xi.data());
}

void Integrand::gradient_xi(std::span<const double> x, std::span<const double> xi, std::span<double> out) const {
  check_dims(d_, x, xi);
  if (static_cast<int>(out.size()) != d_) throw InputError("gradient output has wrong size");
  density_at(x).gradient(xi.data(), out.data());
}

std::vector<double> Integrand::gradient_xi(std::span<const double> x, std::span<const double> xi) const {
  std::vector<double> out(d_);
  gradient_xi(x, xi, out);
  return out;
}

Integrand Integrand::scaled(double t) const {
  if (!(t > 0.0)) throw InputError("integrand scale must be positive");
  Integrand out = *this;
  out.scale_ *= t;
  out.bounds_ = {bounds_.alpha * t, bounds_.beta * t};
  return out;
}

Integrand Integrand::frozen_at(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != d_) throw InputError("freezing point has wrong dimension");
  if (x_independent()) return *this;
  const Density dens = density_at(z);
  const std::string nm = name_ + "@frozen";
  if (dens.kind == Density::Kind::Power) {
    Integrand out(d_, Constant{dens.c}, bounds_, nm);
    return out;
  }
  const Sym2 A = dens.A;
  Integrand out(2, QuadraticMatrix{[A](std::span<const double>) { return A; }}, bounds_, nm);
  out.frozen_ = true;
  return out;
}

std::vector<double> reduce_to_unit_cell(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) {
    v -= std::floor(v);
    if (v >= 1.0) v = 0.0;  // guards -tiny + 1 rounding to exactly 1
  }
  return y;
}

// ---------------------------------------------------------------------------
// FrozenIntegrand

FrozenIntegrand::FrozenIntegrand(const Integrand& base, std::span<const double> z)
    : base_(base), z_(z.begin(), z.end()), frozen_(base.frozen_at(z)) {}

double FrozenIntegrand::evaluate(std::span<const double> x, std::span<const double> xi) const {
  check_dims(base_.dim(), x, xi);
  return frozen_.evaluate(z_, xi);
}

// ---------------------------------------------------------------------------
// Axiom checks

AxiomReport verify_axioms(const Integrand& f, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InputError("verify_axioms needs n_samples >= 1");
  const int d = f.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  std::uniform_real_distribution<double> ulog(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  AxiomReport rep;
  rep.samples = n_samples;
  std::vector<double> x(d), xs(d), xi(d), txi(d), a(d), b(d), m(d);
  for (int s = 0; s < n_samples; ++s) {
    bool bad = false;
    for (int k = 0; k < d; ++k) {
      x[k] = ux(rng);
      xi[k] = normal(rng);
      a[k] = normal(rng);
      b[k] = normal(rng);
    }
    const double mag = std::pow(10.0, ulog(rng));
    for (double& v : xi) v *= mag;
    const double t = std::pow(10.0, ulog(rng));

    const double fx = f.evaluate(x, xi);
    for (int k = 0; k < d; ++k) {
      xs = x;
      xs[k] += 1.0;
      const double defect = std::abs(f.evaluate(xs, xi) - fx) / (1.0 + std::abs(fx));
      rep.max_periodicity_defect = std::max(rep.max_periodicity_defect, defect);
      if (defect > 1e-10) bad = true;
    }

    for (int k = 0; k < d; ++k) txi[k] = t * xi[k];
    const double td = std::pow(t, d);
    const double hom = std::abs(f.evaluate(x, txi) - td * fx) / (1.0 + td * fx);
    rep.max_homogeneity_defect = std::max(rep.max_homogeneity_defect, hom);
    if (hom > 1e-10) bad = true;

    const double r = std::pow(norm2(xi), 0.5 * d);
    const double slack = 1e-12 * (1.0 + r);
    if (fx < f.bounds().alpha * r - slack * f.bounds().alpha || fx > f.bounds().beta * r + slack * f.bounds().beta) {
      ++rep.growth_violations;
      bad = true;
    }

    for (int k = 0; k < d; ++k) m[k] = 0.5 * (a[k] + b[k]);
    const double fa = f.evaluate(x, a);
    const double fb = f.evaluate(x, b);
    const double fm = f.evaluate(x, m);
    if (fm > 0.5 * (fa + fb) * (1.0 + 1e-12) + 1e-14) {
      ++rep.convexity_violations;
      bad = true;
    }
    if (bad && rep.violating_samples.size() < 64) rep.violating_samples.push_back(s);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

Integrand constant(int d, double c) { return Integrand::constant(d, c); }

Integrand sinusoidal(int d) {
  return Integrand::scalar_coefficient(
      d, [](std::span<const double> y) { return 2.0 + std::sin(kTwoPi * y[0]); }, {1.0, 3.0}, "sinusoidal");
}

Integrand laminate(int d, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw InputError("laminate phases must be positive");
  return Integrand::scalar_coefficient(
      d, [lo, hi](std::span<const double> y) { return y[0] < 0.5 ? lo : hi; },
      {std::min(lo, hi), std::max(lo, hi)}, "laminate");
}

Integrand checkerboard(int d, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw InputError("checkerboard phases must be positive");
  return Integrand::scalar_coefficient(
      d,
      [lo, hi](std::span<const double> y) {
        int parity = 0;
        for (double v : y) parity += v < 0.5 ? 0 : 1;
        return parity % 2 == 0 ? lo : hi;
      },
      {std::min(lo, hi), std::max(lo, hi)}, "checkerboard");
}

Integrand by_name(const std::string& name, int d, double c) {
  if (name == "constant") return constant(d, c);
  if (name == "sinusoidal") return sinusoidal(d);
  if (name == "laminate") return laminate(d);
  if (name == "checkerboard") return checkerboard(d);
  throw InputError("unknown integrand preset '" + name + "'");
}

std::vector<std::string> names() { return {"constant", "sinusoidal", "laminate", "checkerboard"}; }

}  // namespace presets

}  // namespace hetcap
