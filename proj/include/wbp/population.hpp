#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wbp/law.hpp"
#include "wbp/rng.hpp"
#include "wbp/stats.hpp"

namespace wbp {

/// Default per-level population cap; overflowing it is an error, not silent
/// subsampling.
inline constexpr std::size_t kDefaultPopulationCap = 10'000'000;

/// Weights dropped below this threshold cannot affect double-precision sums.
inline constexpr double kWeightFloor = 1e-300;

/// The positive weights L_v of one generation.
struct GenerationLevel {
  std::vector<double> weights;
  int generation = 0;

  double z() const {
    KahanSum s;
    for (double w : weights) s.add(w);
    return s.value();
  }
};

/// One trajectory row: the intrinsic martingale, its tilted companions and
/// the level maximum at generation n.
struct TrajectoryRow {
  int n = 0;
  double w = 0.0;                // W_n = Z_n / m(1)^n
  std::vector<double> w_r;       // W_n^{(r)} = Z_n^{(r)} / m(r)^n per requested r
  double max_weight = 0.0;       // M_n
  std::size_t pop_size = 0;
};

struct PopulationRun {
  std::vector<TrajectoryRow> rows;  // n = 0 .. (last completed level)
  std::vector<double> r_set;
  bool overflowed = false;          // explicit truncation marker
  int overflow_generation = -1;
  long dropped_weights = 0;         // weights below kWeightFloor

  double w(int n) const { return rows[static_cast<std::size_t>(n)].w; }
  int horizon() const { return static_cast<int>(rows.size()) - 1; }
};

/// Simulates the process level-by-level (one litter per individual, weights
/// multiplying along edges), streaming: only the current generation's weight
/// vector is retained. If a level would exceed `cap`, the run is returned
/// partial with `overflowed` set.
PopulationRun run_population(const OffspringLaw& law, int n_max,
                             std::span<const double> r_set, std::size_t cap,
                             Rng& rng);

/// Thinning of Eq.-style truncation: weights below 1/K are zeroed and whole
/// litters are zeroed when their sum exceeds K. Exact table transformation
/// for DiscreteTable; a sampled-litter wrapper otherwise (its mean measure is
/// then Monte Carlo backed).
OffspringLaw truncate_law(const OffspringLaw& law, double K);

/// Exact expectation E f(level-n weights) for a DiscreteTable law by
/// exhaustive enumeration over outcome assignments with product
/// probabilities; node ordering is depth-major and fixed. Throws
/// EnumerationTooLarge when the configuration count would exceed 1e7.
double exact_functional(const OffspringLaw& law, int n,
                        const std::function<double(std::span<const double>)>& f);

/// s_n(r) = E (Z_n^{(r)})^{p/r} by Monte Carlo.
Estimate estimate_s_n(const OffspringLaw& law, int n, double r, double p,
                      long reps, Rng& rng);

namespace detail {

/// Builds the next generation from `current`; returns false (leaving `next`
/// unusable) if the level would exceed `cap`. `dropped` counts weights below
/// kWeightFloor.
bool advance_level(const OffspringLaw& law, const std::vector<double>& current,
                   std::vector<double>& next, std::size_t cap, Rng& rng,
                   long& dropped);

}  // namespace detail

}  // namespace wbp
