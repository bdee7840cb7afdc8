#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wbp/errors.hpp"
#include "wbp/population.hpp"
#include "wbp/spine.hpp"

using namespace wbp;

TEST_CASE("binary law gives a forced spine") {
  Rng rng(5);
  OffspringLaw binary = catalog::binary_deterministic();
  SpinePath path = sample_spine(binary, 3, rng);
  CHECK(path.exact);
  CHECK(path.pi_n() == doctest::Approx(0.125).epsilon(0));
  for (int k = 1; k <= 3; ++k) {
    CHECK(path.q(k) == doctest::Approx(1.0).epsilon(0));
    CHECK(path.steps[k - 1].nonspinal_count == 1);
  }
}

TEST_CASE("size-biased one-step means for uniform2") {
  Rng rng(17);
  OffspringLaw u2 = catalog::uniform2();
  MeanVar pi1, q1;
  for (int i = 0; i < 100000; ++i) {
    SpinePath path = sample_spine(u2, 1, rng);
    pi1.add(path.pi_n());
    q1.add(path.q(1));
  }
  // E-hat Pi_1 = E sum L^2 = m(2) = 2/3; E-hat Q_1 = E W_1^2 = 7/6.
  CHECK(std::fabs(pi1.mean() - 2.0 / 3.0) <= 3 * pi1.std_error());
  CHECK(std::fabs(q1.mean() - 7.0 / 6.0) <= 3 * q1.std_error());
}

TEST_CASE("duality E-hat f(Pi_n) = E sum L f(L)") {
  Rng rng(23);
  OffspringLaw u2 = catalog::uniform2();

  // f = 1: both sides are exactly normalization checks.
  DualityResult one = spine_duality_check(u2, 2, [](double) { return 1.0; },
                                          20000, rng);
  CHECK(one.spine.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(one.population.value - 1.0) <= 3 * one.population.std_error);

  // f = x at n = 2: both sides approximate m(2)^2 = 4/9.
  DualityResult lin = spine_duality_check(u2, 2, [](double x) { return x; },
                                          20000, rng);
  CHECK(std::fabs(lin.gap()) <= 3 * lin.combined_std_error);
  CHECK(std::fabs(lin.spine.value - 4.0 / 9.0) <= 4 * lin.spine.std_error);

  // f = log(1+x) on D1 at n = 2 against the enumeration oracle.
  OffspringLaw d1 = catalog::d1();
  auto f = [](double x) { return std::log1p(x); };
  double oracle = exact_functional(d1, 2, [&](std::span<const double> ws) {
    KahanSum s;
    for (double w : ws) s.add(w * f(w));
    return s.value();
  });
  DualityResult logd = spine_duality_check(d1, 2, f, 20000, rng);
  CHECK(std::fabs(logd.spine.value - oracle) <= 3 * logd.spine.std_error);
  CHECK(std::fabs(logd.gap()) <= 3 * logd.combined_std_error);

  // Importance-sampled law: duality still holds, ESS stays sane.
  OffspringLaw ln = catalog::log_normal_critical();
  DualityResult is = spine_duality_check(ln, 2, [](double x) { return x; },
                                         20000, rng);
  CHECK(std::fabs(is.gap()) <= 3 * is.combined_std_error);
  CHECK(is.effective_sample_size > 0.1 * 20000);
}

TEST_CASE("theta tilt weights") {
  Rng rng(29);
  OffspringLaw u2 = catalog::uniform2();

  // theta = 1 is the identity reweighting.
  SpinePath path = sample_spine(u2, 3, rng);
  CHECK(theta_tilt_weight(path, u2, 1.0, 3) == doctest::Approx(1.0).epsilon(1e-12));

  // Mean tilt weight is 1 (total mass) for theta in {1.5, 2}.
  for (double theta : {1.5, 2.0}) {
    MeanVar acc;
    for (int i = 0; i < 100000; ++i) {
      SpinePath p = sample_spine(u2, 1, rng);
      acc.add(theta_tilt_weight(p, u2, theta, 1));
    }
    CHECK(std::fabs(acc.mean() - 1.0) <= 3 * acc.std_error());
  }

  // E-hat^{(2)} Pi_1 = m(3)/m(2) = 3/4 by tilt-reweighted spine MC.
  MeanVar tilted;
  for (int i = 0; i < 100000; ++i) {
    SpinePath p = sample_spine(u2, 1, rng);
    tilted.add(theta_tilt_weight(p, u2, 2.0, 1) * p.pi_n());
  }
  CHECK(std::fabs(tilted.mean() - 0.75) <= 3 * tilted.std_error());
}

TEST_CASE("E-hat log Pi_1 = m'(1)") {
  Rng rng(31);
  OffspringLaw u2 = catalog::uniform2();
  MeanVar acc;
  for (int i = 0; i < 100000; ++i)
    acc.add(std::log(sample_spine(u2, 1, rng).pi_n()));
  CHECK(std::fabs(acc.mean() - (-0.5)) <= 3 * acc.std_error());

  // Importance mode (lognormal): self-normalized estimate.
  OffspringLaw ln = catalog::log_normal_critical();
  WeightedMeanVar wacc;
  for (int i = 0; i < 100000; ++i) {
    SpinePath p = sample_spine(ln, 1, rng);
    wacc.add(std::log(p.pi_n()), p.importance_weight);
  }
  double expected = mean_measure_derivative(ln, 1.0);
  CHECK(std::fabs(wacc.mean() - expected) <= 3 * wacc.std_error());
}

TEST_CASE("spine steps are i.i.d. across k (rejection laws)") {
  for (const auto& [name, law] :
       {std::pair<std::string, OffspringLaw>{"uniform2", catalog::uniform2()},
        std::pair<std::string, OffspringLaw>{"d1", catalog::d1()}}) {
    CAPTURE(name);
    Rng rng(37);
    const int n = 5, reps = 10000;
    std::vector<double> pi_first, pi_last, q_first, q_last;
    for (int i = 0; i < reps; ++i) {
      SpinePath p = sample_spine(law, n, rng);
      pi_first.push_back(p.steps.front().pi_ratio);
      pi_last.push_back(p.steps.back().pi_ratio);
      q_first.push_back(p.steps.front().litter_sum);
      q_last.push_back(p.steps.back().litter_sum);
    }
    double crit = ks_critical(0.001, reps, reps);
    CHECK(ks_two_sample(pi_first, pi_last).statistic < crit);
    CHECK(ks_two_sample(q_first, q_last).statistic < crit);
  }
}

TEST_CASE("concave bound (02)") {
  Rng rng(41);

  // Constant f: both sides equal the constant.
  OffspringLaw binary = catalog::binary_deterministic();
  ConcaveBoundResult cst = concave_bound_check(
      binary, 3, [](double) { return 2.5; }, 2000, rng);
  CHECK(cst.lhs.value == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(cst.rhs.value == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(cst.holds_within_3se);

  // f = min(x,1) on the degenerate law: W_n = 1 and sum Pi_k Q_{k+1} >= 1.
  ConcaveBoundResult minimum = concave_bound_check(
      binary, 3, [](double x) { return std::min(x, 1.0); }, 2000, rng);
  CHECK(minimum.lhs.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(minimum.rhs.value == doctest::Approx(1.0).epsilon(1e-12));

  // f = sqrt on uniform2.
  ConcaveBoundResult root = concave_bound_check(
      catalog::uniform2(), 3, [](double x) { return std::sqrt(x); }, 100000, rng);
  CHECK(root.holds_within_3se);
}

TEST_CASE("mode selection and preconditions") {
  Rng rng(43);
  CHECK_THROWS_AS(
      sample_spine(catalog::log_normal_critical(), 1, rng, SpineMode::rejection),
      PreconditionError);
  SpinePath imp = sample_spine(catalog::log_normal_critical(), 2, rng);
  CHECK_FALSE(imp.exact);
  CHECK(imp.importance_weight > 0.0);
  SpinePath rej = sample_spine(catalog::uniform2(), 2, rng);
  CHECK(rej.exact);
  CHECK(rej.importance_weight == 1.0);
}
