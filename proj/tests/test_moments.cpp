#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wbp/errors.hpp"
#include "wbp/moments.hpp"
#include "wbp/rng.hpp"

using namespace wbp;

TEST_CASE("g and h anchors") {
  OffspringLaw u2 = catalog::uniform2();
  CHECK(h_fn(u2, 1.0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(h_fn(u2, 2.0) ==
        doctest::Approx(-2.0 / 3.0 + std::log(1.5)).epsilon(1e-12));

  OffspringLaw binary = catalog::binary_deterministic();
  CHECK(g_fn(binary, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g_fn(binary, 2.0) == doctest::Approx(-std::log(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("invariant: sign of h matches central-difference g'") {
  for (const auto& [name, law] : catalog::all()) {
    CAPTURE(name);
    for (double r = 1.1; r < 2.0; r += 0.1) {
      double h = 1e-6;
      double gp = (g_fn(law, r + h) - g_fn(law, r - h)) / (2 * h);
      double hr = h_fn(law, r);
      // g'(r) = h(r)/r^2
      CHECK(gp == doctest::Approx(hr / (r * r)).epsilon(1e-4));
      if (std::fabs(hr) > 1e-6) CHECK((gp > 0) == (hr > 0));
    }
  }
}

TEST_CASE("find_theta on the catalog") {
  MomentProfile u2 = find_theta(catalog::uniform2());
  CHECK(u2.theta == doctest::Approx(2.0).epsilon(0));
  CHECK_FALSE(u2.interior_min);
  CHECK(u2.gamma == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));

  // Closed forms for the critical log-normal: theta = sqrt(2 ln 2 / sigma2),
  // gamma = exp(g(theta)) = 2^{-1/9}.
  OffspringLaw ln = catalog::log_normal_critical();
  double sigma2 = std::get<LogNormalWeights>(ln.family()).sigma2;
  double theta_closed = std::sqrt(2.0 * std::log(2.0) / sigma2);
  MomentProfile prof = find_theta(ln);
  CHECK(prof.interior_min);
  CHECK(prof.theta == doctest::Approx(theta_closed).epsilon(1e-9));
  CHECK(prof.theta == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(prof.gamma == doctest::Approx(std::pow(2.0, -1.0 / 9.0)).epsilon(1e-9));

  MomentProfile binary = find_theta(catalog::binary_deterministic());
  CHECK(binary.theta == doctest::Approx(2.0).epsilon(0));
  CHECK(binary.gamma == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-12));

  // Interior minimum satisfies m'(t)/m(t) = log m(t) / t within 1e-8.
  double t = prof.theta;
  double lhs = mean_measure_derivative(ln, t) / mean_measure(ln, t);
  double rhs = std::log(mean_measure(ln, t)) / t;
  CHECK(std::fabs(lhs - rhs) < 1e-8);

  // theta < 2 iff h(2) > 0.
  for (const auto& [name, law] : catalog::all()) {
    CAPTURE(name);
    MomentProfile p = find_theta(law);
    CHECK((p.theta < 2.0) == (h_fn(law, 2.0) > 0.0));
  }
}

TEST_CASE("find_q closed forms and boundaries") {
  MomentProfile prof = find_theta(catalog::log_normal_critical());

  QResult q = find_q(prof, 1.8);
  CHECK_FALSE(q.boundary);
  CHECK(q.q == doctest::Approx(1.25).epsilon(1e-9));
  // Conjugacy: m(q)^{1/q} = m(p)^{1/p} within 1e-9.
  double lhs = std::pow(mean_measure(prof.law, q.q), 1.0 / q.q);
  double rhs = std::pow(mean_measure(prof.law, 1.8), 1.0 / 1.8);
  CHECK(std::fabs(lhs - rhs) < 1e-9);
  CHECK(q.q > 1.0);
  CHECK(q.q < prof.theta);

  // Continuity at the critical value: p slightly above theta gives q near
  // theta.
  QResult near = find_q(prof, 1.5 + 1e-4);
  CHECK(std::fabs(near.q - 1.5) < 5e-4);

  // g(2.25) = 0 = g(1): the conjugate collapses to the boundary.
  QResult boundary = find_q(prof, 2.25);
  CHECK(boundary.boundary);
  CHECK(boundary.q == doctest::Approx(1.0).epsilon(0));

  CHECK_THROWS_AS(find_q(prof, 1.2), PreconditionError);
}

TEST_CASE("predicted_rate piecewise values and continuity") {
  MomentProfile u2 = find_theta(catalog::uniform2());
  CHECK(predicted_rate(u2, 1.5, 2.0) ==
        doctest::Approx(std::pow(2.0 / 3.0, 0.75)).epsilon(1e-12));
  CHECK(predicted_rate(u2, 1.5, 1.2) ==
        doctest::Approx(std::pow(2.0 / 2.2, 1.5 / 1.2)).epsilon(1e-12));

  MomentProfile ln = find_theta(catalog::log_normal_critical());
  // q(p = 1.8) = 1.25, so r = 1.6 sits in the flat branch at m(1.8) = 2^{-0.16}.
  CHECK(predicted_rate(ln, 1.8, 1.6) ==
        doctest::Approx(std::pow(2.0, -0.16)).epsilon(1e-9));

  // Continuity at theta (p <= theta, uses the lognormal with theta = 1.5).
  double below = predicted_rate(ln, 1.4, std::nexttoward(1.5, 1.0));
  double at = predicted_rate(ln, 1.4, 1.5);
  CHECK(std::fabs(below - at) < 1e-9);

  // Continuity at q (p > theta case).
  double q = find_q(ln, 1.8).q;
  double left = predicted_rate(ln, 1.8, std::nexttoward(q, 1.0));
  double right = predicted_rate(ln, 1.8, q);
  CHECK(std::fabs(left - right) < 1e-9);

  CHECK_THROWS_AS(predicted_rate(ln, 1.9999, 1.0), PreconditionError);  // m(p) close to 1
}

TEST_CASE("check_lp anchors") {
  CHECK(check_lp(catalog::uniform2(), 2.0).holds);
  CHECK(check_lp(catalog::uniform2(), 2.0).margin ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_FALSE(check_lp(catalog::log_normal_critical(), 2.5).holds);
  CHECK(catalog::binary_deterministic().degenerate());
}

TEST_CASE("check_main1 threshold behaviour") {
  OffspringLaw u2 = catalog::uniform2();
  Main1Result lo = check_main1(u2, 1.5, 0.1);
  CHECK(lo.sufficient.holds);
  CHECK(lo.necessary.holds);
  CHECK(lo.r_star == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(lo.sufficient.margin ==
        doctest::Approx(1.0 - std::exp(0.1) * std::sqrt(2.0 / 3.0)).epsilon(1e-9));

  Main1Result hi = check_main1(u2, 1.5, 0.25);
  CHECK_FALSE(hi.sufficient.holds);
  CHECK_FALSE(hi.necessary.holds);

  Main1Result tiny = check_main1(u2, 1.5, 1e-9);
  CHECK(tiny.sufficient.holds);

  // arg inf g >= 2 for uniform2, so the sharpened criterion compares at r = 2.
  REQUIRE(lo.sharpened.has_value());
  CHECK(lo.sharpened->holds);
  CHECK(lo.sharpened->margin ==
        doctest::Approx(1.0 - std::exp(0.1) * std::sqrt(2.0 / 3.0)).epsilon(1e-9));

  // Critical lognormal with p above theta: sharpened compares at p itself.
  Main1Result sharp = check_main1(catalog::log_normal_critical(), 1.8, 0.05);
  REQUIRE(sharp.sharpened.has_value());
  double v = std::exp(0.05) * std::pow(mean_measure(catalog::log_normal_critical(), 1.8), 1.0 / 1.8);
  CHECK(sharp.sharpened->margin == doctest::Approx(1.0 - v).epsilon(1e-9));

  CHECK_THROWS_AS(check_main1(u2, 2.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(check_main1(u2, 1.5, 0.0), PreconditionError);
}

TEST_CASE("check_main2 threshold behaviour") {
  OffspringLaw u2 = catalog::uniform2();
  double a_star = 0.5 * std::log(1.5);
  CHECK(check_main2(u2, 2.0, 0.15).holds);
  CHECK_FALSE(check_main2(u2, 2.0, 0.25).holds);
  CHECK(check_main2(u2, 2.0, a_star - 0.01).holds);
  CHECK_FALSE(check_main2(u2, 2.0, a_star + 0.01).holds);

  OffspringLaw d1 = catalog::d1();
  double a_star_d1 = 0.5 * std::log(16.0 / 11.0);
  CHECK(check_main2(d1, 2.0, 0.15).holds);
  CHECK(check_main2(d1, 2.0, a_star_d1 - 0.01).holds);
  CHECK_FALSE(check_main2(d1, 2.0, a_star_d1 + 0.01).holds);

  CHECK_THROWS_AS(check_main2(u2, 1.5, 0.1), PreconditionError);
}

TEST_CASE("property: main1 sufficient implies necessary on random configs") {
  Rng rng(20250810);
  auto laws = catalog::nondegenerate();
  for (int i = 0; i < 100; ++i) {
    const auto& law = laws[i % laws.size()].second;
    double p = 1.05 + 0.9 * rng.uniform();
    double a = 0.001 + 0.5 * rng.uniform();
    Main1Result res = check_main1(law, p, a);
    if (res.sufficient.holds) CHECK(res.necessary.holds);
  }
}

TEST_CASE("analyze composes a full report") {
  CriterionReport rep = analyze(catalog::log_normal_critical(), 1.8, 0.05);
  CHECK(rep.theta == doctest::Approx(1.5).epsilon(1e-9));
  REQUIRE(rep.q.has_value());
  CHECK(*rep.q == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(rep.main1.has_value());
  CHECK_FALSE(rep.main2.has_value());

  CriterionReport rep2 = analyze(catalog::uniform2(), 2.0, 0.15);
  CHECK(rep2.main2.has_value());
  CHECK(rep2.main2->holds);
  CHECK_FALSE(rep2.degenerate);

  CriterionReport rep3 = analyze(catalog::binary_deterministic(), 2.0, 0.15);
  CHECK(rep3.degenerate);
}
