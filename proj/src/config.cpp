#include "hetcap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "hetcap/integrand.hpp"

namespace hetcap {

const char* command_name(Command c) {
  switch (c) {
    case Command::Capacity: return "capacity";
    case Command::Phi: return "phi";
    case Command::Fhom: return "fhom";
    case Command::Chom: return "chom";
    case Command::Claw: return "claw";
    case Command::Mu: return "mu";
    case Command::Perforate: return "perforate";
    case Command::Verify: return "verify";
  }
  return "?";
}

std::string ConfigIssue::str() const {
  std::string where = line > 0 ? "line " + std::to_string(line) : "command line";
  return where + ": " + key + ": " + reason;
}

std::string ParseResult::message() const {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += '\n';
    out += i.str();
  }
  return out;
}

namespace {

using Setter = std::function<std::string(RunConfig&, const std::string&)>;

// Returns an error reason, empty on success.
std::string parse_real(const std::string& s, double& out) {
  std::string body = s;
  bool exp_form = false;
  if (body.rfind("e^", 0) == 0) {
    body = body.substr(2);
    exp_form = true;
  }
  const char* b = body.data();
  const char* e = body.data() + body.size();
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || body.empty()) return "'" + s + "' is not a number";
  if (exp_form) v = std::exp(v);
  if (!std::isfinite(v)) return "'" + s + "' is not finite";
  out = v;
  return {};
}

std::string parse_int(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e || s.empty()) return "'" + s + "' is not an integer";
  return {};
}

std::string parse_list(const std::string& s, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (auto err = parse_real(item, v); !err.empty()) return err;
    out.push_back(v);
  }
  if (out.empty()) return "empty list";
  return {};
}

Setter positive_real(double RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    double x = 0.0;
    if (auto err = parse_real(v, x); !err.empty()) return err;
    if (!(x > 0.0)) return "must be positive";
    c.*field = x;
    return {};
  };
}

Setter nonneg_real(double RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    double x = 0.0;
    if (auto err = parse_real(v, x); !err.empty()) return err;
    if (!(x >= 0.0)) return "must be >= 0";
    c.*field = x;
    return {};
  };
}

Setter int_at_least(int RunConfig::*field, long long lo, long long hi = 1 << 20) {
  return [field, lo, hi](RunConfig& c, const std::string& v) -> std::string {
    long long x = 0;
    if (auto err = parse_int(v, x); !err.empty()) return err;
    if (x < lo || x > hi) return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    c.*field = static_cast<int>(x);
    return {};
  };
}

Setter one_of(std::string RunConfig::*field, std::vector<std::string> allowed) {
  return [field, allowed](RunConfig& c, const std::string& v) -> std::string {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      return "'" + v + "' is not one of {" + list + "}";
    }
    c.*field = v;
    return {};
  };
}

Setter positive_list(std::vector<double> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    std::vector<double> xs;
    if (auto err = parse_list(v, xs); !err.empty()) return err;
    for (double x : xs) {
      if (!(x > 0.0)) return "entries must be positive";
    }
    c.*field = std::move(xs);
    return {};
  };
}

Setter file_name(std::string RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    if (v.empty() || v.find('/') != std::string::npos) return "must be a plain file name";
    c.*field = v;
    return {};
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["command"] = [](RunConfig& c, const std::string& v) -> std::string {
      for (Command k : {Command::Capacity, Command::Phi, Command::Fhom, Command::Chom, Command::Claw, Command::Mu,
                        Command::Perforate, Command::Verify}) {
        if (v == command_name(k)) {
          c.command = k;
          return {};
        }
      }
      return "unknown command '" + v + "'";
    };
    t["d"] = int_at_least(&RunConfig::d, 2, 3);
    t["integrand"] = one_of(&RunConfig::integrand, presets::names());
    t["c"] = positive_real(&RunConfig::c);
    t["coef_lo"] = positive_real(&RunConfig::coef_lo);
    t["coef_hi"] = positive_real(&RunConfig::coef_hi);
    t["domain"] = [](RunConfig&, const std::string& v) -> std::string {
      return v == "unit" ? std::string() : "only the unit box preset is available";
    };
    t["box_lo"] = [](RunConfig& c, const std::string& v) { return parse_list(v, c.box.lo); };
    t["box_hi"] = [](RunConfig& c, const std::string& v) { return parse_list(v, c.box.hi); };
    t["z"] = [](RunConfig& c, const std::string& v) { return parse_list(v, c.z); };
    t["r"] = positive_real(&RunConfig::r);
    t["R"] = positive_real(&RunConfig::R);
    t["schedule"] = positive_list(&RunConfig::schedule);
    t["eps_schedule"] = [](RunConfig& c, const std::string& v) -> std::string {
      std::vector<double> xs;
      if (auto err = parse_list(v, xs); !err.empty()) return err;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0 && xs[i] < 1.0)) return "entries must lie in (0, 1)";
        if (i > 0 && !(xs[i] < xs[i - 1])) return "must be strictly decreasing";
      }
      c.eps_schedule = std::move(xs);
      return {};
    };
    t["eps"] = [](RunConfig& c, const std::string& v) -> std::string {
      double x = 0.0;
      if (auto err = parse_real(v, x); !err.empty()) return err;
      if (!(x > 0.0 && x < 1.0)) return "must lie in (0, 1)";
      c.eps = x;
      return {};
    };
    t["lambda"] = [](RunConfig& c, const std::string& v) -> std::string {
      std::vector<double> xs;
      if (auto err = parse_list(v, xs); !err.empty()) return err;
      for (double x : xs) {
        if (!(x >= 0.0 && x <= 1.0)) return "must lie in [0, 1]";
      }
      c.lambdas = std::move(xs);
      return {};
    };
    t["directions"] = int_at_least(&RunConfig::directions, 8);
    t["cell_n"] = int_at_least(&RunConfig::cell_n, 8, 4096);
    t["per_log_radius"] = int_at_least(&RunConfig::per_log_radius, 4);
    t["n_angular"] = int_at_least(&RunConfig::n_angular, 8);
    t["refine"] = [](RunConfig& c, const std::string& v) -> std::string {
      if (v == "true" || v == "1") c.refine = true;
      else if (v == "false" || v == "0") c.refine = false;
      else return "expected true or false";
      return {};
    };
    t["mu_method"] = one_of(&RunConfig::mu_method, {"polar", "box"});
    t["mu_n_angular"] = int_at_least(&RunConfig::mu_n_angular, 8);
    t["h"] = nonneg_real(&RunConfig::h);
    t["target"] = one_of(&RunConfig::target, {"zero", "one", "x1"});
    t["alpha"] = positive_real(&RunConfig::alpha);
    t["M"] = int_at_least(&RunConfig::M, 1, 30);
    t["tolerance"] = positive_real(&RunConfig::tolerance);
    t["n_samples"] = int_at_least(&RunConfig::n_samples, 0, 1000000);
    t["seed"] = [](RunConfig& c, const std::string& v) -> std::string {
      long long x = 0;
      if (auto err = parse_int(v, x); !err.empty()) return err;
      if (x < 0) return "must be >= 0";
      c.seed = static_cast<std::uint64_t>(x);
      return {};
    };
    t["threads"] = int_at_least(&RunConfig::threads, 1, 1024);
    t["csv"] = file_name(&RunConfig::csv);
    t["json"] = file_name(&RunConfig::json);
    return t;
  }();
  return table;
}

struct Token {
  int line;
  std::string key;
  std::string value;
};

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

ParseResult parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  ParseResult res;
  std::vector<Token> tokens;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) {
        res.issues.push_back({lineno, tok, "expected key=value"});
        continue;
      }
      Token t{lineno, tok.substr(0, eq), tok.substr(eq + 1)};
      if (!seen.insert(t.key).second) {
        res.issues.push_back({lineno, t.key, "duplicate key"});
        continue;
      }
      tokens.push_back(std::move(t));
    }
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      res.issues.push_back({0, o, "expected key=value"});
      continue;
    }
    tokens.push_back({0, o.substr(0, eq), o.substr(eq + 1)});
  }

  RunConfig cfg;
  const auto& table = setters();
  std::set<std::string> given;
  for (const Token& t : tokens) {
    auto it = table.find(t.key);
    if (it == table.end()) {
      res.issues.push_back({t.line, t.key, "unknown key"});
      continue;
    }
    if (std::string err = it->second(cfg, t.value); !err.empty()) {
      res.issues.push_back({t.line, t.key, err});
      continue;
    }
    given.insert(t.key);
    auto e = std::find_if(cfg.echo.begin(), cfg.echo.end(), [&](const auto& kv) { return kv.first == t.key; });
    if (e != cfg.echo.end()) e->second = t.value;
    else cfg.echo.emplace_back(t.key, t.value);
  }

  for (const char* key : {"command", "d"}) {
    if (!given.count(key)) res.issues.push_back({0, key, "required key is missing"});
  }

  // cross-field checks once everything is known
  if (given.count("d")) {
    const int d = cfg.d;
    if (cfg.box.lo.empty() && cfg.box.hi.empty()) {
      cfg.box = Box::unit(d);
    } else {
      if (cfg.box.lo.empty()) cfg.box.lo.assign(d, 0.0);
      if (cfg.box.hi.empty()) cfg.box.hi.assign(d, 1.0);
      if (static_cast<int>(cfg.box.lo.size()) != d || static_cast<int>(cfg.box.hi.size()) != d) {
        res.issues.push_back({0, "box_lo", "box corners need d entries"});
      } else {
        for (int a = 0; a < d; ++a) {
          if (!(cfg.box.lo[a] < cfg.box.hi[a])) res.issues.push_back({0, "box_hi", "needs box_lo < box_hi"});
        }
      }
    }
    if (cfg.z.empty()) cfg.z.assign(d, 0.0);
    if (static_cast<int>(cfg.z.size()) != d) res.issues.push_back({0, "z", "needs d entries"});
  }
  if (given.count("r") || given.count("R")) {
    if (!(cfg.R > cfg.r)) res.issues.push_back({0, "R", "needs R > r"});
  }
  if (!(cfg.coef_lo <= cfg.coef_hi)) res.issues.push_back({0, "coef_hi", "needs coef_lo <= coef_hi"});

  if (cfg.csv.empty()) cfg.csv = std::string(command_name(cfg.command)) + ".csv";
  if (cfg.json.empty()) cfg.json = std::string(command_name(cfg.command)) + ".json";

  if (res.issues.empty()) res.config = std::move(cfg);
  return res;
}

}  // namespace hetcap
