#include "hetcap/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hetcap/asymptotic.hpp"
#include "hetcap/capacity.hpp"
#include "hetcap/cell.hpp"
#include "hetcap/error.hpp"
#include "hetcap/parallel.hpp"
#include "hetcap/perforated.hpp"
#include "hetcap/verify.hpp"

namespace hetcap {

using Json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(std::size_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(bool v) { return v ? "true" : "false"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
  }
};

struct Output {
  Table table;
  Json results = Json::object();
  Json verdicts = Json::object();
  int exit_code = 0;
};

PolarResolution polar_res(const RunConfig& c) {
  PolarResolution r;
  r.per_log_radius = c.per_log_radius;
  r.n_angular = c.n_angular;
  return r;
}

MuResolution mu_res(const RunConfig& c) {
  MuResolution r;
  r.method = c.mu_method == "box" ? MuMethod::MaskedBox : MuMethod::CenteredPolar;
  r.n_angular = c.mu_n_angular;
  r.h = c.h;
  return r;
}

std::vector<double> schedule_or_default(const RunConfig& c) {
  return c.schedule.empty() ? default_schedule() : c.schedule;
}

Json extrapolation_json(const LogExtrapolation& e) {
  return Json{{"estimate", e.estimate},
              {"slope", e.slope},
              {"residual", e.residual},
              {"low_confidence", e.low_confidence}};
}

void extrapolation_rows(Table& t, const LogExtrapolation& e) {
  t.header = {"R", "minimum", "rescaled", "estimate"};
  for (const auto& s : e.samples) t.rows.push_back({num(s.R), num(s.minimum), num(s.rescaled), num(e.estimate)});
}

Output run_capacity(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const Integrand g = f.x_independent() ? f : f.frozen_at(cfg.z);
  const bool known = cfg.integrand == "constant";
  const double exact = known ? cfg.c * analytic_capacity(cfg.d, cfg.r, cfg.R) : std::nan("");
  o.table.header = {"level", "n_radial", "n_angular", "minimum", "analytic", "rel_error", "iterations"};
  std::vector<double> errors;
  const int levels = cfg.refine ? 2 : 1;
  PolarResolution res = polar_res(cfg);
  for (int level = 0; level < levels; ++level) {
    const AnnulusMinimum m = annulus_minimum(g, cfg.r, cfg.R, res);
    if (!m.converged) throw NumericalError("annulus solve did not converge");
    const double err = known ? std::abs(m.value - exact) / exact : std::nan("");
    errors.push_back(err);
    o.table.rows.push_back({num(level), num(m.n_radial), num(m.n_angular), num(m.value), num(exact), num(err),
                            num(m.iterations)});
    o.results["minimum_level_" + std::to_string(level)] = m.value;
    res = res.refined(2);
  }
  if (known) o.results["analytic"] = exact;
  if (known && errors.size() == 2 && errors[1] > 0.0) o.results["observed_order"] = std::log2(errors[0] / errors[1]);
  return o;
}

Output run_phi(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const LogExtrapolation e = phi_estimate(f, cfg.z, schedule_or_default(cfg), polar_res(cfg));
  extrapolation_rows(o.table, e);
  o.results["phi"] = extrapolation_json(e);
  const double s = sigma(cfg.d);
  o.verdicts["within_growth_bounds"] = e.estimate >= f.bounds().alpha * s && e.estimate <= f.bounds().beta * s;
  return o;
}

Output run_fhom(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const Integrand table = tabulate_fhom(f, cfg.directions, cfg.cell_n);
  o.table.header = {"angle", "fhom"};
  for (int k = 0; k < cfg.directions; ++k) {
    const double th = 2.0 * std::numbers::pi * k / cfg.directions;
    const std::vector<double> xi{std::cos(th), std::sin(th)};
    const std::vector<double> y{0.0, 0.0};
    o.table.rows.push_back({num(th), num(table.evaluate(y, xi))});
  }
  if (!std::holds_alternative<Integrand::HomogenizedTable>(f.model()) && cfg.d == 2) {
    const HomogenizedMatrix A = quadratic_homogenized_matrix(f, cfg.cell_n);
    o.results["A_hom"] = Json::array({Json::array({A.A.xx, A.A.xy}), Json::array({A.A.xy, A.A.yy})});
    o.results["sqrt_det"] = A.sqrt_det;
  }
  return o;
}

Output run_chom(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const Integrand table = f.x_independent() ? f : tabulate_fhom(f, cfg.directions, cfg.cell_n);
  const LogExtrapolation e = chom_estimate(table, schedule_or_default(cfg), polar_res(cfg));
  extrapolation_rows(o.table, e);
  o.results["chom"] = extrapolation_json(e);
  return o;
}

Output run_claw(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const std::vector<double> eps = cfg.eps_schedule.empty()
                                      ? std::vector<double>{std::exp(-4.0), std::exp(-6.0), std::exp(-8.0)}
                                      : cfg.eps_schedule;
  const LawConstants k = estimate_law_constants(f, cfg.z, cfg.directions, cfg.cell_n, schedule_or_default(cfg),
                                                polar_res(cfg));
  o.results["phi"] = k.phi;
  o.results["chom"] = k.chom;
  o.table.header = {"lambda", "eps", "delta", "mu", "rescaled", "lower", "upper", "sandwiched", "prediction"};
  Json per = Json::array();
  bool all = true;
  for (double lambda : cfg.lambdas) {
    const LawReport r = law_sweep(f, cfg.box, cfg.z, lambda, eps, k, mu_res(cfg));
    for (const LawRow& row : r.rows) {
      o.table.rows.push_back({num(lambda), num(row.eps), num(row.delta), num(row.mu), num(row.rescaled),
                              num(row.lower), num(row.upper), num(row.sandwiched), num(r.prediction)});
    }
    per.push_back(Json{{"lambda", lambda},
                       {"prediction", r.prediction},
                       {"sandwiched", r.sandwiched},
                       {"trend", r.trend},
                       {"pass", r.pass}});
    all = all && r.pass;
  }
  o.verdicts["per_lambda"] = per;
  o.verdicts["pass"] = all;
  return o;
}

Output run_mu(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const double eps = cfg.eps > 0.0 ? cfg.eps : std::exp(-4.0);
  o.table.header = {"lambda", "eps", "delta", "mu", "rescaled", "nodes", "far_cells", "iterations"};
  Json per = Json::array();
  for (double lambda : cfg.lambdas) {
    const AsymptoticParams p = AsymptoticParams::make(cfg.d, eps, lambda);
    const MuResult m = mu_eps_delta(f, cfg.box, cfg.z, p, mu_res(cfg));
    o.table.rows.push_back({num(lambda), num(eps), num(p.delta), num(m.value), num(m.rescaled), num(m.nodes),
                            num(m.far_cells), num(m.iterations)});
    per.push_back(Json{{"lambda", lambda}, {"mu", m.value}, {"rescaled", m.rescaled}});
  }
  o.results["mu"] = per;
  return o;
}

TargetField target_of(const RunConfig& cfg) {
  if (cfg.target == "zero") return TargetField::constant(0.0);
  if (cfg.target == "x1") return TargetField::coordinate(0);
  return TargetField::constant(1.0);
}

Output run_perforate(const RunConfig& cfg, const Integrand& f) {
  Output o;
  const std::vector<double> eps = cfg.eps_schedule.empty()
                                      ? std::vector<double>{std::exp(-3.0), std::exp(-4.0), std::exp(-5.0)}
                                      : cfg.eps_schedule;
  StrangeTermOptions so;
  so.recovery.alpha = cfg.alpha;
  so.recovery.M = cfg.M;
  so.recovery.profile = polar_res(cfg);
  so.recovery.corrector_n = std::min(cfg.cell_n, 64);
  so.tolerance = cfg.tolerance;
  so.h = cfg.h;
  o.table.header = {"lambda", "eps", "d_k", "delta_requested", "delta", "interior", "boundary", "recovery_energy",
                    "per_area", "gamma_energy", "gap", "relative_gap", "boundary_share", "vanishes"};
  Json per = Json::array();
  bool all = true;
  for (double lambda : cfg.lambdas) {
    const StrangeTermReport r = strange_term_experiment(target_of(cfg), f, lambda, eps, cfg.box, so);
    for (const StrangeTermRow& row : r.rows) {
      o.table.rows.push_back({num(lambda), num(row.eps), num(row.period), num(row.delta_requested), num(row.delta),
                              num(row.interior), num(row.boundary), num(row.recovery_energy), num(row.per_area),
                              num(row.gamma_energy), num(row.gap), num(row.relative_gap), num(row.boundary_share),
                              num(row.vanishes)});
    }
    per.push_back(Json{{"lambda", lambda},
                       {"c_lambda", r.c_lambda_value},
                       {"gap_decreasing", r.gap_decreasing},
                       {"final_within_tolerance", r.final_within_tolerance},
                       {"vanishes", r.vanishes},
                       {"pass", r.pass}});
    all = all && r.pass;
  }
  o.verdicts["per_lambda"] = per;
  o.verdicts["pass"] = all;
  return o;
}

Output run_verify(const RunConfig& cfg, std::ostream* log) {
  Output o;
  const SuiteReport rep = run_invariant_suite(cfg.n_samples, cfg.seed);
  o.table.header = {"check", "passed", "value", "limit"};
  for (const CheckResult& c : rep.checks) {
    o.table.rows.push_back({c.name, num(c.passed), num(c.value), num(c.limit)});
    if (log && !c.passed) *log << "FAIL " << c.name << " value=" << num(c.value) << " limit=" << num(c.limit) << '\n';
  }
  o.results["passed"] = rep.passed();
  o.results["failed"] = rep.failed();
  o.verdicts["pass"] = rep.failed() == 0;
  if (log) *log << "verify: " << rep.passed() << " passed, " << rep.failed() << " failed\n";
  o.exit_code = rep.failed() == 0 ? 0 : 1;
  return o;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  out << text;
  if (!out) throw IoError("write to " + p.string() + " failed");
}

}  // namespace

Integrand make_integrand(const RunConfig& cfg) {
  if (cfg.integrand == "constant") return presets::constant(cfg.d, cfg.c);
  if (cfg.integrand == "laminate") return presets::laminate(cfg.d, cfg.coef_lo, cfg.coef_hi);
  if (cfg.integrand == "checkerboard") return presets::checkerboard(cfg.d, cfg.coef_lo, cfg.coef_hi);
  return presets::by_name(cfg.integrand, cfg.d, cfg.c);
}

RunOutcome run(const RunConfig& cfg, const std::string& out_dir, std::ostream* log) {
  RunOutcome outcome;
  const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  outcome.csv_path = (dir / cfg.csv).string();
  outcome.json_path = (dir / cfg.json).string();

  Json summary;
  summary["schema_version"] = 1;
  summary["command"] = command_name(cfg.command);
  Json inputs = Json::object();
  for (const auto& [k, v] : cfg.echo) inputs[k] = v;
  inputs["seed"] = cfg.seed;
  inputs["threads"] = cfg.threads;
  summary["inputs"] = inputs;

  set_thread_count(cfg.threads);
  Output o;
  try {
    const Integrand f = make_integrand(cfg);
    switch (cfg.command) {
      case Command::Capacity: o = run_capacity(cfg, f); break;
      case Command::Phi: o = run_phi(cfg, f); break;
      case Command::Fhom: o = run_fhom(cfg, f); break;
      case Command::Chom: o = run_chom(cfg, f); break;
      case Command::Claw: o = run_claw(cfg, f); break;
      case Command::Mu: o = run_mu(cfg, f); break;
      case Command::Perforate: o = run_perforate(cfg, f); break;
      case Command::Verify: o = run_verify(cfg, log); break;
    }
    outcome.exit_code = o.exit_code;
    summary["status"] = "ok";
  } catch (const Error& e) {
    const bool bad_input = e.code() == ErrorCode::Input || e.code() == ErrorCode::Parameter ||
                           e.code() == ErrorCode::Config || e.code() == ErrorCode::DomainTooSmall;
    outcome.exit_code = bad_input ? 2 : 1;
    outcome.message = e.what();
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.message = e.what();
    summary["status"] = "error";
    summary["error"] = e.what();
  }
  summary["results"] = o.results;
  summary["verdicts"] = o.verdicts;

  try {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::ostringstream csv;
    o.table.write(csv);
    if (!o.table.header.empty()) write_file(outcome.csv_path, csv.str());
    write_file(outcome.json_path, summary.dump(2) + "\n");
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.message = e.what();
  }
  if (log && !outcome.message.empty()) *log << "error: " << outcome.message << '\n';
  return outcome;
}

}  // namespace hetcap
