#pragma once

#include <cstdint>
#include <ostream>

namespace wbp {

struct ValidationSummary {
  int passed = 0;
  int failed = 0;

  bool ok() const { return failed == 0; }
  int total() const { return passed + failed; }
};

/// Runs the module invariant suites (model, moments, population, spine,
/// series, config) at their specified scales, printing one line per check.
ValidationSummary run_validation_suite(std::uint64_t seed, int workers,
                                       std::ostream& log);

}  // namespace wbp
