#include "hetcap/hetcap.h"

#include <iostream>
#include <memory>
#include <string>

#include "hetcap/asymptotic.hpp"
#include "hetcap/capacity.hpp"
#include "hetcap/config.hpp"
#include "hetcap/error.hpp"
#include "hetcap/parallel.hpp"
#include "hetcap/perforated.hpp"
#include "hetcap/runner.hpp"

struct hc_config {
  hetcap::RunConfig cfg;
  std::string command;
};

struct hc_integrand {
  hetcap::Integrand f;
};

namespace {

thread_local std::string g_last_error;

hc_status fail(hc_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs fn, translating library exceptions into status codes.
template <class F>
hc_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    fn();
    return HC_OK;
  } catch (const hetcap::Error& e) {
    return fail(static_cast<hc_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HC_ERR_INTERNAL, "unknown exception");
  }
}

#define HC_REQUIRE(ptr)                                                      \
  do {                                                                       \
    if (!(ptr)) return fail(HC_ERR_NULL_ARGUMENT, #ptr " must not be NULL"); \
  } while (0)

}  // namespace

extern "C" {

const char* hc_version(void) { return "1.0.0"; }

const char* hc_status_name(hc_status status) {
  switch (status) {
    case HC_OK: return "ok";
    case HC_ERR_INPUT: return "input error";
    case HC_ERR_RESOLUTION: return "resolution error";
    case HC_ERR_PARAMETER: return "parameter error";
    case HC_ERR_DOMAIN_TOO_SMALL: return "domain too small";
    case HC_ERR_NUMERICAL: return "numerical error";
    case HC_ERR_PRECONDITION: return "precondition error";
    case HC_ERR_CONFIG: return "configuration error";
    case HC_ERR_IO: return "i/o error";
    case HC_ERR_NULL_ARGUMENT: return "null argument";
    case HC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hc_last_error(void) { return g_last_error.c_str(); }

hc_status hc_set_threads(int n) {
  if (n < 1) return fail(HC_ERR_INPUT, "thread count must be >= 1");
  return guarded([&] { hetcap::set_thread_count(n); });
}

hc_status hc_config_parse(const char* text, const char* const* overrides, size_t n_overrides, hc_config** out) {
  HC_REQUIRE(text);
  HC_REQUIRE(out);
  *out = nullptr;
  if (n_overrides > 0) HC_REQUIRE(overrides);
  return guarded([&] {
    std::vector<std::string> ov;
    for (size_t i = 0; i < n_overrides; ++i) {
      if (!overrides[i]) throw hetcap::InputError("override entries must not be NULL");
      ov.emplace_back(overrides[i]);
    }
    hetcap::ParseResult r = hetcap::parse_config(text, ov);
    if (!r.ok()) throw hetcap::ConfigError(r.message());
    auto h = std::make_unique<hc_config>();
    h->command = hetcap::command_name(r.config->command);
    h->cfg = std::move(*r.config);
    *out = h.release();
  });
}

void hc_config_free(hc_config* config) { delete config; }

hc_status hc_config_command(const hc_config* config, const char** out) {
  HC_REQUIRE(config);
  HC_REQUIRE(out);
  *out = config->command.c_str();
  return HC_OK;
}

hc_status hc_run(const hc_config* config, const char* out_dir, int log_to_stderr, int* exit_code) {
  HC_REQUIRE(config);
  HC_REQUIRE(out_dir);
  HC_REQUIRE(exit_code);
  return guarded([&] {
    const hetcap::RunOutcome o = hetcap::run(config->cfg, out_dir, log_to_stderr ? &std::cerr : nullptr);
    *exit_code = o.exit_code;
    g_last_error = o.message;
  });
}

hc_status hc_integrand_preset(const char* name, int d, double c, hc_integrand** out) {
  HC_REQUIRE(name);
  HC_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new hc_integrand{hetcap::presets::by_name(name, d, c)}; });
}

void hc_integrand_free(hc_integrand* integrand) { delete integrand; }

hc_status hc_integrand_eval(const hc_integrand* integrand, const double* x, const double* xi, double* out) {
  HC_REQUIRE(integrand);
  HC_REQUIRE(x);
  HC_REQUIRE(xi);
  HC_REQUIRE(out);
  return guarded([&] {
    const std::size_t d = static_cast<std::size_t>(integrand->f.dim());
    *out = integrand->f.evaluate({x, d}, {xi, d});
  });
}

hc_status hc_integrand_bounds(const hc_integrand* integrand, double* alpha, double* beta) {
  HC_REQUIRE(integrand);
  HC_REQUIRE(alpha);
  HC_REQUIRE(beta);
  *alpha = integrand->f.bounds().alpha;
  *beta = integrand->f.bounds().beta;
  return HC_OK;
}

hc_status hc_analytic_capacity(int d, double r, double R, double* out) {
  HC_REQUIRE(out);
  return guarded([&] { *out = hetcap::analytic_capacity(d, r, R); });
}

hc_status hc_annulus_minimum(const hc_integrand* integrand, double r, double R, int per_log_radius, int n_angular,
                             double* out) {
  HC_REQUIRE(integrand);
  HC_REQUIRE(out);
  return guarded([&] {
    hetcap::PolarResolution res;
    if (per_log_radius > 0) res.per_log_radius = per_log_radius;
    if (n_angular > 0) res.n_angular = n_angular;
    const hetcap::AnnulusMinimum m = hetcap::annulus_minimum(integrand->f, r, R, res);
    if (!m.converged) throw hetcap::NumericalError("annulus solve did not converge");
    *out = m.value;
  });
}

hc_status hc_c_lambda(double phi, double chom, double lambda, int d, double* out) {
  HC_REQUIRE(out);
  return guarded([&] { *out = hetcap::c_lambda(phi, chom, lambda, d); });
}

hc_status hc_two_well_min(double a, double b, int d, double* x_star, double* value) {
  HC_REQUIRE(x_star);
  HC_REQUIRE(value);
  return guarded([&] {
    const hetcap::TwoWell w = hetcap::scalar_two_well_min(a, b, d);
    *x_star = w.x_star;
    *value = w.value;
  });
}

hc_status hc_critical_period(double eps, int d, double* out) {
  HC_REQUIRE(out);
  return guarded([&] { *out = hetcap::critical_period(eps, d); });
}

}  // extern "C"
