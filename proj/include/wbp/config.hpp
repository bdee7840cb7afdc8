#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wbp/law.hpp"

namespace wbp {

/// Parsed and validated experiment configuration. Flat structured text with
/// [law], [experiment] and [output] stanzas; unknown keys are rejected and
/// all numeric ranges are validated before any simulation starts.
struct ExperimentConfig {
  // [law]
  std::string family;            // iid_scaled_uniform | log_normal | poisson_gw | discrete_table
  int b = 2;                     // child count (iid_scaled_uniform, log_normal)
  double sigma2 = 0.5;           // log_normal
  double lambda = 2.0;           // poisson_gw
  std::vector<DiscreteTable::Outcome> outcomes;  // discrete_table rows

  // [experiment]
  double p = 2.0;
  double a = 0.1;
  int n_max = 8;
  int horizon = 12;
  long reps = 10000;
  std::size_t cap = 10'000'000;
  std::vector<double> r_set;
  std::uint64_t seed = 1;
  int workers = 1;

  // [output]
  std::string out_dir = ".";

  OffspringLaw law() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical re-emission of the resolved config; parsing it back yields an
/// identical configuration (round-trip support for reports).
std::string config_to_text(const ExperimentConfig& cfg);

/// Full-precision decimal rendering (17 significant digits), used by every
/// CSV writer.
std::string format_full(double x);

}  // namespace wbp
