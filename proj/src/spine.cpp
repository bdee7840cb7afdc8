#include "wbp/spine.hpp"

#include <cmath>

#include "wbp/errors.hpp"
#include "wbp/population.hpp"

namespace wbp {

namespace {

constexpr long kMaxRejectionTries = 1'000'000;

// One size-biased litter draw. Rejection: accept a base draw with
// probability W_1 / bound (zero-sum litters never accept, which matches the
// size-biased law putting no mass there). Importance: return the base draw
// with weight W_1, resampling zero-sum litters since their weight vanishes
// anyway.
Litter draw_size_biased(const OffspringLaw& law, Rng& rng, bool rejection,
                        double bound, double* weight) {
  if (rejection) {
    for (long tries = 0; tries < kMaxRejectionTries; ++tries) {
      Litter litter = sample_litter(law, rng);
      double w1 = litter.sum();
      if (w1 > 0.0 && rng.uniform() < w1 / bound) {
        *weight = 1.0;
        return litter;
      }
    }
    throw NonPositiveLitter("sample_spine: rejection loop failed to accept");
  }
  for (long tries = 0; tries < kMaxRejectionTries; ++tries) {
    Litter litter = sample_litter(law, rng);
    double w1 = litter.sum();
    if (w1 > 0.0) {
      *weight = w1;
      return litter;
    }
  }
  throw NonPositiveLitter("sample_spine: base law never produced positive mass");
}

}  // namespace

SpinePath sample_spine(const OffspringLaw& law, int n, Rng& rng, SpineMode mode) {
  if (n < 0) throw PreconditionError("sample_spine: n must be >= 0");
  auto bound = law.litter_sum_bound();
  bool rejection;
  switch (mode) {
    case SpineMode::rejection:
      if (!bound)
        throw PreconditionError(
            "sample_spine: rejection mode requires a certified litter-sum bound");
      rejection = true;
      break;
    case SpineMode::importance:
      rejection = false;
      break;
    case SpineMode::auto_select:
    default:
      rejection = bound.has_value();
      break;
  }

  SpinePath path;
  path.exact = rejection;
  path.pi.reserve(static_cast<std::size_t>(n) + 1);
  path.pi.push_back(1.0);
  path.steps.reserve(static_cast<std::size_t>(n));

  for (int k = 1; k <= n; ++k) {
    double step_weight = 1.0;
    Litter litter =
        draw_size_biased(law, rng, rejection, bound.value_or(0.0), &step_weight);
    path.importance_weight *= step_weight;

    double q = litter.sum();
    // Spine child: one uniform against the cumulative normalized litter;
    // zero-weight children are excluded.
    double u = rng.uniform() * q;
    double acc = 0.0;
    double chosen = 0.0;
    std::size_t chosen_idx = litter.weights.size();
    for (std::size_t i = 0; i < litter.weights.size(); ++i) {
      if (litter.weights[i] <= 0.0) continue;
      acc += litter.weights[i];
      if (u < acc) {
        chosen = litter.weights[i];
        chosen_idx = i;
        break;
      }
    }
    if (chosen_idx == litter.weights.size()) {
      // Rounding pushed u past the last positive entry; take it.
      for (std::size_t i = litter.weights.size(); i-- > 0;) {
        if (litter.weights[i] > 0.0) {
          chosen = litter.weights[i];
          chosen_idx = i;
          break;
        }
      }
    }

    SpineStep step;
    step.pi_ratio = chosen;
    step.litter_sum = q;
    for (std::size_t i = 0; i < litter.weights.size(); ++i)
      if (i != chosen_idx && litter.weights[i] > 0.0)
        step.sibling_weights.push_back(litter.weights[i]);
    step.nonspinal_count = static_cast<int>(step.sibling_weights.size());
    path.pi.push_back(path.pi.back() * chosen);
    path.steps.push_back(std::move(step));
  }
  return path;
}

DualityResult spine_duality_check(const OffspringLaw& law, int n,
                                  const std::function<double(double)>& f,
                                  long reps, Rng& rng) {
  DualityResult res;

  WeightedMeanVar spine_acc;
  for (long i = 0; i < reps; ++i) {
    SpinePath path = sample_spine(law, n, rng);
    spine_acc.add(f(path.pi_n()), path.importance_weight);
  }
  res.spine = spine_acc.estimate();
  res.effective_sample_size = spine_acc.effective_sample_size();

  MeanVar pop_acc;
  std::vector<double> level, next;
  long dropped = 0;
  for (long i = 0; i < reps; ++i) {
    level.assign(1, 1.0);
    bool ok = true;
    for (int g = 0; g < n && ok; ++g) {
      ok = detail::advance_level(law, level, next, kDefaultPopulationCap, rng,
                                 dropped);
      if (!ok) throw PopulationOverflow("spine_duality_check: population overflow");
      level.swap(next);
    }
    KahanSum s;
    for (double w : level) s.add(w * f(w));
    pop_acc.add(s.value());
  }
  res.population = pop_acc.estimate();
  res.combined_std_error = std::sqrt(res.spine.std_error * res.spine.std_error +
                                     res.population.std_error * res.population.std_error);
  return res;
}

double theta_tilt_weight(const SpinePath& path, const OffspringLaw& law,
                         double theta, int n) {
  double m_theta = mean_measure(law, theta);
  if (!std::isfinite(m_theta) || !(m_theta > 0.0))
    throw DomainError("theta_tilt_weight: m(theta) must be finite and positive");
  double pi_n = path.pi[static_cast<std::size_t>(n)];
  return std::pow(pi_n, theta - 1.0) / std::pow(m_theta, n);
}

ConcaveBoundResult concave_bound_check(const OffspringLaw& law, int n,
                                       const std::function<double(double)>& f,
                                       long reps, Rng& rng) {
  ConcaveBoundResult res;

  // E-hat f(W_n) = E[W_n f(W_n)]: the size-biased density on F_n is W_n.
  MeanVar lhs_acc;
  std::vector<double> level, next;
  long dropped = 0;
  for (long i = 0; i < reps; ++i) {
    level.assign(1, 1.0);
    for (int g = 0; g < n; ++g) {
      if (!detail::advance_level(law, level, next, kDefaultPopulationCap, rng,
                                 dropped))
        throw PopulationOverflow("concave_bound_check: population overflow");
      level.swap(next);
    }
    KahanSum z;
    for (double w : level) z.add(w);
    double wn = z.value();
    lhs_acc.add(wn * f(wn));
  }
  res.lhs = lhs_acc.estimate();

  WeightedMeanVar rhs_acc;
  for (long i = 0; i < reps; ++i) {
    SpinePath path = sample_spine(law, n, rng);
    KahanSum s;
    for (int k = 0; k < n; ++k)
      s.add(path.pi[static_cast<std::size_t>(k)] * path.q(k + 1));
    rhs_acc.add(f(s.value()), path.importance_weight);
  }
  res.rhs = rhs_acc.estimate();

  res.combined_std_error = std::sqrt(res.lhs.std_error * res.lhs.std_error +
                                     res.rhs.std_error * res.rhs.std_error);
  res.holds_within_3se =
      res.lhs.value <= res.rhs.value + 3.0 * res.combined_std_error;
  return res;
}

}  // namespace wbp
