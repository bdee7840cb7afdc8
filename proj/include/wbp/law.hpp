#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wbp/rng.hpp"
#include "wbp/stats.hpp"

namespace wbp {

/// One individual's litter: the weights L_1,...,L_J attached to its children.
struct Litter {
  std::vector<double> weights;

  double sum() const {
    KahanSum s;
    for (double w : weights) s.add(w);
    return s.value();
  }
};

/// b children with weights L_i = (2/b) U_i, U_i iid uniform(0,1).
/// m(1) = 1 by construction; W_1 <= 2 surely.
struct IidScaledUniform {
  int child_count = 2;
};

/// b children with weights L_i = exp(N(0, sigma2)) / (b e^{sigma2/2}).
/// m(1) = 1 by construction; m(r) = b^{1-r} exp(sigma2 r(r-1)/2).
struct LogNormalWeights {
  int child_count = 2;
  double sigma2 = 0.5;
};

/// Galton-Watson offspring J ~ Poisson(lambda), each child carrying the
/// deterministic weight 1/lambda. m(r) = lambda^{1-r}.
struct PoissonGW {
  double lambda = 2.0;
};

/// Finite mixture of fixed weight vectors: outcome j occurs with probability
/// prob_j and yields the litter weights_j. Zero weights are permitted and
/// contribute nothing to any moment.
struct DiscreteTable {
  struct Outcome {
    double prob = 0.0;
    std::vector<double> weights;
  };
  std::vector<Outcome> outcomes;
};

class OffspringLaw;

/// Thinning of a base law: weights below 1/K are zeroed, and the whole
/// litter is zeroed when its sum exceeds K.
struct Truncated {
  std::shared_ptr<const OffspringLaw> base;
  double cutoff = 1.0;  // K
};

/// Parametric litter law of the point process driving the branching process.
/// Immutable after construction; safe to share across parallel workers.
class OffspringLaw {
 public:
  using Family =
      std::variant<IidScaledUniform, LogNormalWeights, PoissonGW, DiscreteTable,
                   Truncated>;

  /// Validates invariants: nonnegative weights, DiscreteTable probabilities
  /// summing to 1 within 1e-12, and (unless `require_supercritical` is false,
  /// as for truncated thinnings) mean offspring E J > 1.
  explicit OffspringLaw(Family family, bool require_supercritical = true);

  const Family& family() const { return family_; }
  std::string family_name() const;

  /// True when P{W_1 = 1} = 1; such laws are accepted but all series vanish.
  bool degenerate() const { return degenerate_; }

  /// Certified almost-sure bound on the litter sum W_1, when one exists
  /// (DiscreteTable: max outcome sum; IidScaledUniform: 2).
  std::optional<double> litter_sum_bound() const;

  /// Expected number of positive-weight children.
  double mean_offspring() const;

  /// Interval {r > 0 : m(r) < infinity}. All built-in families are finite on
  /// (0, infinity).
  std::pair<double, double> finiteness_domain() const {
    return {0.0, std::numeric_limits<double>::infinity()};
  }

  /// Replicate count and seed for Monte Carlo fallbacks (truncated
  /// non-discrete laws, non-closed-form moments). Fixed at construction so
  /// MC-backed values are deterministic for a given law object.
  long mc_reps() const { return mc_reps_; }
  std::uint64_t mc_seed() const { return mc_seed_; }
  void set_mc(long reps, std::uint64_t seed) {
    mc_reps_ = reps;
    mc_seed_ = seed;
  }

 private:
  Family family_;
  bool degenerate_ = false;
  long mc_reps_ = 100000;
  std::uint64_t mc_seed_ = 0x5eedab1e0ddba11ULL;
};

/// Draws one litter. Reproducible given the stream state.
Litter sample_litter(const OffspringLaw& law, Rng& rng);

/// m(r) = E sum_i L_i^r, closed form per family; Monte Carlo for truncated
/// non-discrete laws (deterministic via the law's embedded MC settings).
double mean_measure(const OffspringLaw& law, double r);

/// m'(r) = E sum_i L_i^r log L_i (terms with L_i = 0 contribute 0).
/// Analytic per family; central difference with step max(1e-6, 1e-6 r) for
/// laws without a closed form.
double mean_measure_derivative(const OffspringLaw& law, double r);

/// Rescales weights by 1/m(1) so the result has m(1) = 1 (exact no-op for
/// families normalized by construction). DomainError if m(1) is 0 or not
/// finite.
OffspringLaw normalize(const OffspringLaw& law);

/// E W_1^p. Exact for DiscreteTable (finite sum) and for p = 2 (closed form
/// via the litter variance); otherwise MC with reported standard error.
/// Throws DivergentMoment if the MC tail diagnostic flags p outside the
/// moment domain.
Estimate w1_moment(const OffspringLaw& law, double p);

/// mu_p = E |W_1 - 1|^p, same evaluation strategy as w1_moment.
Estimate mu_p(const OffspringLaw& law, double p);

/// Exact litter variance mu_2 = Var W_1 (closed form for every family).
double mu2_exact(const OffspringLaw& law);

/// Catalog laws used by the validation suites and the acceptance tests.
namespace catalog {

/// Deterministic binary split {(1.0, [0.5, 0.5])}: the degenerate baseline.
OffspringLaw binary_deterministic();

/// D1 = {(0.5, [0.75, 0.75]), (0.5, [0.5])}.
OffspringLaw d1();

OffspringLaw uniform2();

/// sigma2 chosen as 2 ln 2 / theta^2 with theta = 1.5, so m(2.25) = 1
/// exactly and the minimizer of m^{1/r}(r) sits at r = 1.5.
OffspringLaw log_normal_critical();

OffspringLaw poisson(double lambda = 2.0);

/// All nondegenerate catalog laws.
std::vector<std::pair<std::string, OffspringLaw>> nondegenerate();

/// All catalog laws including the degenerate baseline.
std::vector<std::pair<std::string, OffspringLaw>> all();

}  // namespace catalog

}  // namespace wbp
