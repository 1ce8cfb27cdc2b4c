#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlbe {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 2026;
  int hoeffding_families = 100;
  int max_ineq_families = 1000;
  int tilt_families = 200;
};

// Exhaustive / property suites for the inequality devices:
//   - Hoeffding-type tail bound against exact enumeration,
//   - the symmetric max-of-sum inequality on fuzzed families,
//   - the tilt identity (exact reweighting) plus its moment bounds,
//   - Chebyshev consistency of tail sums against tracked moments,
//   - unit-freeness of the uniform and non-uniform bound terms.
std::vector<CheckResult> run_verification_suite(const VerifyOptions& opts = {});

}  // namespace nlbe
