#pragma once

#include <iosfwd>
#include <string>

#include "hetcap/config.hpp"
#include "hetcap/integrand.hpp"

namespace hetcap {

/// Exit status of a run: 0 success, 1 numerical or I/O failure, 2 bad input.
struct RunOutcome {
  int exit_code = 0;
  std::string csv_path;
  std::string json_path;
  std::string message;
};

/// Integrand named by the configuration.
Integrand make_integrand(const RunConfig& cfg);

/// Runs the configured command, writes <csv> and <json> under out_dir and
/// prints a short summary to log when given. The verify command exits 1 when
/// a check fails.
RunOutcome run(const RunConfig& cfg, const std::string& out_dir, std::ostream* log = nullptr);

}  // namespace hetcap
