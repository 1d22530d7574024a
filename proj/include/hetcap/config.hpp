#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetcap/grid.hpp"

namespace hetcap {

enum class Command { Capacity, Phi, Fhom, Chom, Claw, Mu, Perforate, Verify };

const char* command_name(Command c);

/// One configuration problem. Line 0 means a command-line override.
struct ConfigIssue {
  int line = 0;
  std::string key;
  std::string reason;

  std::string str() const;
};

struct RunConfig {
  Command command = Command::Capacity;
  int d = 2;

  std::string integrand = "constant";
  double c = 1.0;
  double coef_lo = 1.0;
  double coef_hi = 4.0;

  Box box;  // unit box unless box_lo / box_hi are given
  std::vector<double> z;

  double r = 1.0;
  double R = 2.718281828459045;
  std::vector<double> schedule;      // R values for phi / chom extrapolation
  std::vector<double> eps_schedule;  // claw, perforate
  double eps = 0.0;                  // mu
  std::vector<double> lambdas{0.5};

  int directions = 64;
  int cell_n = 64;
  int per_log_radius = 32;
  int n_angular = 128;
  bool refine = false;

  std::string mu_method = "polar";
  int mu_n_angular = 256;
  double h = 0.0;

  std::string target = "one";
  double alpha = 0.1;
  int M = 1;
  double tolerance = 0.2;

  int n_samples = 200;
  std::uint64_t seed = 0;
  int threads = 1;

  std::string csv;   // file names inside the output directory
  std::string json;

  /// Accepted key/value pairs in the order they were applied.
  std::vector<std::pair<std::string, std::string>> echo;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<ConfigIssue> issues;

  bool ok() const { return config.has_value(); }
  std::string message() const;  // issues joined by newlines
};

/// Whitespace- or newline-separated key=value tokens, '#' starts a comment.
/// Numbers accept the form e^k for exp(k); lists are comma-separated.
/// Overrides ("key=value") are applied after the document and may repeat
/// keys from it. Unknown keys, duplicates within the document, bad values and
/// missing required keys are all reported.
ParseResult parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

/// Known keys, sorted.
std::vector<std::string> config_keys();

}  // namespace hetcap
