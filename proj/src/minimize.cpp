#include "hetcap/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "hetcap/error.hpp"

namespace hetcap {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double t, std::span<const double> p, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + t * p[i];
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + what);
}

struct LineSearchResult {
  double t = 0.0;
  double energy = 0.0;
  bool ok = false;
};

// Secant search for a zero of phi'(t) = <grad E(x + t p), p> on a bracket,
// then an energy check with halving as the fallback.
LineSearchResult nonlinear_search(const EnergyFunctional& E, std::span<const double> x, std::span<const double> p,
                                  double e0, double slope0, double t_guess, std::vector<double>& trial,
                                  std::vector<double>& grad) {
  auto slope_at = [&](double t) {
    axpy(t, p, x, trial);
    E.energy_and_gradient(trial, grad);
    const double s = dot(grad, p);
    check_finite(s, "line search");
    return s;
  };

  double a = 0.0;
  double sa = slope0;
  double b = t_guess;
  double sb = slope_at(b);
  int expand = 0;
  while (sb < 0.0 && expand < 60) {
    a = b;
    sa = sb;
    b *= 2.0;
    sb = slope_at(b);
    ++expand;
  }
  double t = b;
  if (sb >= 0.0) {
    // Illinois-style regula falsi on the bracket [a, b]
    int side = 0;
    for (int it = 0; it < 30; ++it) {
      t = (a * sb - b * sa) / (sb - sa);
      if (!(t > a && t < b)) t = 0.5 * (a + b);
      const double st = slope_at(t);
      if (std::abs(st) <= 0.05 * std::abs(slope0)) break;
      if (st < 0.0) {
        a = t;
        sa = st;
        if (side == -1) sb *= 0.5;
        side = -1;
      } else {
        b = t;
        sb = st;
        if (side == 1) sa *= 0.5;
        side = 1;
      }
      if (b - a <= 1e-14 * b) break;
    }
  }

  for (int halve = 0; halve < 60; ++halve) {
    axpy(t, p, x, trial);
    const double et = E.energy(trial);
    check_finite(et, "line search");
    if (et <= e0 + 1e-4 * t * slope0) return {t, et, true};
    t *= 0.5;
  }
  return {};
}

}  // namespace

MinimizeResult minimize_energy(const EnergyFunctional& E, const DiscreteField& u0, const SolveOptions& opts) {
  const Grid& g = E.grid();
  if (u0.grid.get() != &g && (u0.values.size() != g.num_nodes())) throw InputError("initial field lives on another grid");
  if (!u0.satisfies_constraints(1e-12)) throw PreconditionError("initial field violates the Dirichlet constraints");
  if (opts.energy_tol <= 0.0 || opts.grad_tol < 0.0) throw InputError("solver tolerances must be positive");

  const std::size_t n = g.num_nodes();
  std::vector<double> x = u0.values;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.is_fixed(i)) x[i] = g.fixed_value(i);
  }
  std::vector<double> grad(n), grad_new(n), p(n), trial(n), scratch(n);

  double e = E.energy_and_gradient(x, grad);
  check_finite(e, "initial energy");
  double gnorm = std::sqrt(dot(grad, grad));
  const double grad_tol = opts.grad_tol > 0.0 ? opts.grad_tol : 1e-8 * (gnorm + 1.0);
  const int max_iter = opts.max_iterations > 0
                           ? opts.max_iterations
                           : static_cast<int>(20.0 * std::sqrt(static_cast<double>(g.num_free())) + 500.0);

  MinimizeResult res;
  if (opts.keep_history) res.history.push_back(e);
  std::deque<double> recent{e};
  for (std::size_t i = 0; i < n; ++i) p[i] = -grad[i];
  double prev_step = 0.0;
  double prev_slope = 0.0;
  int it = 0;
  bool converged = gnorm <= grad_tol;

  while (!converged && it < max_iter) {
    double slope = dot(grad, p);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) p[i] = -grad[i];
      slope = -gnorm * gnorm;
    }

    double t = 0.0;
    double e_new = 0.0;
    bool have_grad = false;
    if (E.quadratic()) {
      double q = E.quadratic_form(p);
      const double pp = dot(p, p);
      if (q < 1e-14 * pp) {
        for (std::size_t i = 0; i < n; ++i) p[i] = -grad[i];
        slope = -gnorm * gnorm;
        q = E.quadratic_form(p);
        if (q < 1e-14 * gnorm * gnorm) break;
      }
      t = -slope / (2.0 * q);
      axpy(t, p, x, trial);
      e_new = E.energy_and_gradient(trial, grad_new);
      have_grad = true;
    } else {
      double guess = prev_step > 0.0 ? prev_step * prev_slope / slope : 1.0 / std::max(gnorm, 1e-300);
      if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0 / std::max(gnorm, 1e-300);
      LineSearchResult ls = nonlinear_search(E, x, p, e, slope, guess, trial, scratch);
      if (!ls.ok) {
        // retry along steepest descent before giving up
        for (std::size_t i = 0; i < n; ++i) p[i] = -grad[i];
        slope = -gnorm * gnorm;
        ls = nonlinear_search(E, x, p, e, slope, 1.0 / std::max(gnorm, 1e-300), trial, scratch);
        if (!ls.ok) break;
      }
      t = ls.t;
      e_new = ls.energy;
    }
    check_finite(e_new, "energy");
    if (e_new > e) {
      // No descent left at this precision. Accept as converged when the
      // model decrease of the step is at rounding level.
      const double predicted = -0.5 * slope * t;
      if (predicted <= 1e-10 * std::max(std::abs(e), 1e-300)) converged = true;
      break;
    }

    if (!have_grad) axpy(t, p, x, trial);
    x.swap(trial);
    if (!have_grad) e_new = E.energy_and_gradient(x, grad_new);
    ++it;

    double beta = 0.0;
    const double gg = gnorm * gnorm;
    if (gg > 0.0) {
      double num = 0.0;
      for (std::size_t i = 0; i < n; ++i) num += grad_new[i] * (grad_new[i] - grad[i]);
      beta = std::max(0.0, num / gg);
    }
    grad.swap(grad_new);
    gnorm = std::sqrt(dot(grad, grad));
    for (std::size_t i = 0; i < n; ++i) p[i] = -grad[i] + beta * p[i];
    prev_step = t;
    prev_slope = slope;

    e = std::min(e, e_new);
    if (opts.keep_history) res.history.push_back(e);
    recent.push_back(e);
    if (recent.size() > 6) recent.pop_front();

    if (gnorm <= grad_tol) converged = true;
    if (recent.size() == 6) {
      const double drop = recent.front() - recent.back();
      if (drop <= opts.energy_tol * std::max(std::abs(e), 1e-300)) converged = true;
    }
  }

  res.field = DiscreteField(u0.grid, std::move(x));
  res.energy = e;
  res.grad_norm = gnorm;
  res.iterations = it;
  res.converged = converged || gnorm <= grad_tol;

  if (opts.clamp01) {
    DiscreteField c = clamp01(res.field);
    if (c.satisfies_constraints(0.0)) {
      const double ec = E.energy(c.values);
      if (ec <= res.energy) {
        res.field = std::move(c);
        res.energy = ec;
      }
    }
  }
  return res;
}

MinimizeResult minimize_energy(GridPtr grid, const Integrand& integrand, double delta, const DiscreteField& u0,
                               const SolveOptions& opts) {
  EnergyOptions eo;
  eo.delta = delta;
  EnergyFunctional E(std::move(grid), integrand, eo);
  return minimize_energy(E, u0, opts);
}

DiscreteField clamp01(const DiscreteField& u) {
  std::vector<double> v = u.values;
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return DiscreteField(u.grid, std::move(v));
}

}  // namespace hetcap
