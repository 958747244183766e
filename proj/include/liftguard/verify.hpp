#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liftguard/io.hpp"

namespace liftguard {

struct PropertyFailure {
  int trial = 0;
  std::uint64_t seed = 0;
  Json plant;
  std::string detail;
};

struct PropertyResult {
  std::string name;
  int trials = 0;
  int passed = 0;
  std::vector<PropertyFailure> failures;  // first few counterexamples
  bool ok() const { return passed == trials; }
};

struct VerifyOptions {
  int trials = 100;
  std::uint64_t seed = 0;
  /// Negative control: corrupt one lifted feedthrough block before the
  /// shift-consistency check.
  bool inject_lifted_fault = false;
  int max_dumps = 5;
};

/// Per-trial generator seed derived from the suite seed.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Names of the property suites, in report order.
const std::vector<std::string>& property_names();

/// Runs one suite by name; unknown names raise an argument error.
PropertyResult run_property_suite(const std::string& name, const VerifyOptions& options);

/// Randomized invariant suites over discretization, factorization and lifting.
std::vector<PropertyResult> run_property_suites(const VerifyOptions& options);

Json to_json(const PropertyResult& r);

}  // namespace liftguard
