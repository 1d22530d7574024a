#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hetcap {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured quantity
  double limit = 0.0;  // what it was compared against
};

struct SuiteReport {
  std::vector<CheckResult> checks;

  int passed() const;
  int failed() const;
};

/// Invariant suite over every module. n_samples scales the random ensembles;
/// the outcome depends only on (n_samples, seed).
SuiteReport run_invariant_suite(int n_samples, std::uint64_t seed);

}  // namespace hetcap
