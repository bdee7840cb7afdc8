#pragma once

#include <functional>
#include <vector>

#include "wbp/law.hpp"
#include "wbp/rng.hpp"
#include "wbp/stats.hpp"

namespace wbp {

enum class SpineMode {
  auto_select,  // rejection when a litter-sum bound is certified, else importance
  rejection,
  importance,
};

/// One spine step: the chosen child's edge weight, the litter sum Q_k, the
/// count and weights of the nonspinal positive-weight siblings.
struct SpineStep {
  double pi_ratio = 0.0;     // Pi_k / Pi_{k-1}
  double litter_sum = 0.0;   // Q_k
  int nonspinal_count = 0;   // |I_k|
  std::vector<double> sibling_weights;
};

/// A spine path under the size-biased measure. With rejection sampling the
/// path is an exact draw (importance_weight 1); in importance mode the raw
/// steps follow the base litter law and importance_weight = prod_k Q_k must
/// be self-normalized across replicates.
struct SpinePath {
  std::vector<SpineStep> steps;  // k = 1..n
  std::vector<double> pi;        // Pi_0 = 1, .., Pi_n
  double importance_weight = 1.0;
  bool exact = true;

  double pi_n() const { return pi.back(); }
  double q(int k) const { return steps[static_cast<std::size_t>(k - 1)].litter_sum; }
};

/// Draws one spine path of length n: each step samples the litter under the
/// size-biased litter law (density W_1), then picks the spine child with
/// probability proportional to its weight. PreconditionError if rejection is
/// requested without a certified bound.
SpinePath sample_spine(const OffspringLaw& law, int n, Rng& rng,
                       SpineMode mode = SpineMode::auto_select);

/// Two-estimator check of the duality E-hat f(Pi_n) = E sum_v L_v f(L_v):
/// spine MC on the left, population MC on the right.
struct DualityResult {
  Estimate spine;
  Estimate population;
  double combined_std_error = 0.0;
  double effective_sample_size = 0.0;  // spine side (reps when exact)

  double gap() const { return spine.value - population.value; }
};

DualityResult spine_duality_check(const OffspringLaw& law, int n,
                                  const std::function<double(double)>& f,
                                  long reps, Rng& rng);

/// Radon-Nikodym factor Pi_n^{theta-1} / m(theta)^n reweighting the spine
/// measure to its theta-tilted companion.
double theta_tilt_weight(const SpinePath& path, const OffspringLaw& law,
                         double theta, int n);

/// Concave-bound check: E-hat f(W_n) <= E-hat f(sum_k Pi_k Q_{k+1}) for
/// nondecreasing concave f >= 0. The left side is computed as E[W_n f(W_n)]
/// under the base measure, the right by spine MC.
struct ConcaveBoundResult {
  Estimate lhs;
  Estimate rhs;
  double combined_std_error = 0.0;
  bool holds_within_3se = false;
};

ConcaveBoundResult concave_bound_check(const OffspringLaw& law, int n,
                                       const std::function<double(double)>& f,
                                       long reps, Rng& rng);

}  // namespace wbp
