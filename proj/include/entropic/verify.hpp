#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entropic {

struct CriterionResult {
  std::string id;
  std::string suite;
  std::string title;
  bool pass = false;
  std::string measured;
  std::string tolerance;
};

struct VerifyOptions {
  /// Suites to run; every suite when empty.
  std::vector<std::string> suites;
  /// Perturbs the analytic update directions inside the gradient suite so it
  /// must fail.
  bool inject_gradient_fault = false;
};

/// Names of the numbered acceptance criteria, in order.
const std::vector<std::string>& criterion_suites();
/// Every suite: the criteria followed by the extra property suites.
const std::vector<std::string>& all_suites();

/// Throws Error(kConfig) for an unknown suite name.
std::vector<CriterionResult> run_verification(const VerifyOptions& options);

/// "PASS  [id] title | measured ... | tolerance ...".
std::string format_result(const CriterionResult& result);

}  // namespace entropic
