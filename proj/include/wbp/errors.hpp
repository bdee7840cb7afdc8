#pragma once

#include <stdexcept>
#include <string>

namespace wbp {

/// Argument outside the finiteness domain of a moment function.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A generation exceeded the per-level population cap and the operation
/// cannot return a partial result.
struct PopulationOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration would exceed the configuration budget.
struct EnumerationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Too few usable points for a regression.
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Monte Carlo tail diagnostic flags a moment as divergent.
struct DivergentMoment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A size-biased draw produced a zero-mass litter where positive mass is
/// required.
struct NonPositiveLitter : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wbp
