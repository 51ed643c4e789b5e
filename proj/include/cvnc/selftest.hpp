#pragma once

#include <string>
#include <vector>

namespace cvnc {

struct CriterionResult {
  std::string name;
  bool passed;
  std::string details;
};

/// Runs the acceptance criteria. `only` filters by substring match on the
/// criterion name; the seed drives every randomized sub-suite.
std::vector<CriterionResult> run_acceptance_suite(unsigned long long seed = 2026,
                                                  const std::string& only = "");

}  // namespace cvnc
