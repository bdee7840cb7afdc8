#include "wbp/moments.hpp"

#include <cmath>

#include "wbp/errors.hpp"

namespace wbp {

namespace {

constexpr double kRootTol = 1e-10;
constexpr double kBoundaryTol = 1e-9;

double require_finite_positive(double m, double r) {
  if (!std::isfinite(m) || !(m > 0.0))
    throw DomainError("moment function undefined at r = " + std::to_string(r));
  return m;
}

// Bisection for an increasing function with a sign change on [lo, hi].
template <class F>
double bisect_increasing(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (std::fabs(fm) < tol) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimization of a unimodal function on [lo, hi].
template <class F>
double golden_min(F&& f, double lo, double hi) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double g_fn(const OffspringLaw& law, double r) {
  if (!(r > 0.0)) throw DomainError("g_fn: r must be > 0");
  double m = require_finite_positive(mean_measure(law, r), r);
  return std::log(m) / r;
}

double h_fn(const OffspringLaw& law, double r) {
  if (!(r > 0.0)) throw DomainError("h_fn: r must be > 0");
  double m = require_finite_positive(mean_measure(law, r), r);
  return r * mean_measure_derivative(law, r) / m - std::log(m);
}

MomentProfile find_theta(const OffspringLaw& law) {
  MomentProfile prof{law, 0.0, 0.0, 2.0, 0.0, false};
  auto [lo, hi] = law.finiteness_domain();
  prof.domain_lo = lo;
  prof.domain_hi = hi;

  double upper = std::min(2.0, hi);
  if (!std::isfinite(mean_measure(law, upper))) {
    // m blows up before 2: minimize g directly on [1, upper) with theta
    // capped at 2.
    double theta = golden_min([&](double r) { return g_fn(law, r); }, 1.0,
                              std::nexttoward(upper, 1.0));
    prof.theta = std::min(theta, 2.0);
    prof.interior_min = prof.theta < 2.0;
    prof.gamma = std::exp(g_fn(law, prof.theta));
    return prof;
  }

  double h2 = h_fn(law, upper);
  if (h2 <= 0.0) {
    prof.theta = upper;
    prof.interior_min = false;
  } else {
    // h is increasing with h(1) = m'(1) < 0 in the uniformly integrable
    // regime; its unique zero in (1,2) is the interior minimizer of g.
    prof.theta =
        bisect_increasing([&](double r) { return h_fn(law, r); }, 1.0, upper, kRootTol);
    prof.interior_min = true;
  }
  prof.gamma = std::exp(g_fn(law, prof.theta));
  return prof;
}

QResult find_q(const MomentProfile& prof, double p) {
  if (!(p > prof.theta))
    throw PreconditionError("find_q: requires p > theta");
  if (!prof.interior_min)
    throw PreconditionError("find_q: requires an interior minimum of g");
  double gp = g_fn(prof, p);
  if (gp >= -kBoundaryTol) {
    // g(p) >= g(1) = 0 (law normalized): the conjugate collapses to the
    // boundary r = 1.
    return {1.0, true};
  }
  // g decreases on (1, theta); find the unique solution of g(q) = g(p).
  double q = bisect_increasing([&](double r) { return gp - g_fn(prof, r); }, 1.0,
                               prof.theta, kRootTol);
  return {q, false};
}

double predicted_rate(const MomentProfile& prof, double p, double r) {
  if (!(p > 1.0 && p < 2.0))
    throw PreconditionError("predicted_rate: p must lie in (1,2)");
  if (!(r >= 1.0 && r <= 2.0))
    throw PreconditionError("predicted_rate: r must lie in [1,2]");
  double mp = mean_measure(prof.law, p);
  if (mp >= 1.0)
    throw PreconditionError("predicted_rate: requires m(p) < 1");
  if (p <= prof.theta) {
    if (r < prof.theta) return std::pow(mean_measure(prof.law, r), p / r);
    return std::pow(prof.gamma, p);
  }
  double q = find_q(prof, p).q;
  if (r < q) return std::pow(mean_measure(prof.law, r), p / r);
  return mp;
}

Verdict check_lp(const OffspringLaw& law, double p) {
  if (!(p > 1.0)) throw PreconditionError("check_lp: p must be > 1");
  double mp = mean_measure(law, p);
  Verdict v;
  v.margin = 1.0 - mp;
  bool moment_ok = true;
  try {
    moment_ok = std::isfinite(w1_moment(law, p).value);
  } catch (const DivergentMoment&) {
    moment_ok = false;
  }
  v.holds = moment_ok && mp < 1.0;
  v.boundary = std::fabs(mp - 1.0) <= kBoundaryTol;
  return v;
}

namespace {

// The criterion function phi(r) = e^a m(r)^{1/r} = exp(a + g(r)); unimodal on
// [p,2] by logconvexity of m. Golden section, cross-checked on a coarse grid
// with a dense-grid fallback for flat stretches.
double minimize_phi(const OffspringLaw& law, double a, double p, double* r_star) {
  auto phi = [&](double r) { return std::exp(a + g_fn(law, r)); };
  double best_r = golden_min([&](double r) { return g_fn(law, r); }, p, 2.0);
  double best = phi(best_r);
  bool suspicious = false;
  for (int i = 0; i <= 40; ++i) {
    double r = p + (2.0 - p) * i / 40.0;
    if (phi(r) < best - 1e-12) suspicious = true;
  }
  if (suspicious) {
    for (int i = 0; i <= 2000; ++i) {
      double r = p + (2.0 - p) * i / 2000.0;
      double v = phi(r);
      if (v < best) {
        best = v;
        best_r = r;
      }
    }
  }
  for (double r : {p, 2.0}) {
    double v = phi(r);
    if (v < best) {
      best = v;
      best_r = r;
    }
  }
  if (r_star) *r_star = best_r;
  return best;
}

bool moment_finite(const OffspringLaw& law, double r) {
  try {
    return std::isfinite(w1_moment(law, r).value);
  } catch (const DivergentMoment&) {
    return false;
  }
}

}  // namespace

Main1Result check_main1(const OffspringLaw& law, double p, double a) {
  if (!(p > 1.0 && p < 2.0))
    throw PreconditionError("check_main1: p must lie in (1,2)");
  if (!(a > 0.0)) throw PreconditionError("check_main1: a must be > 0");

  Main1Result res;
  double inf_phi = minimize_phi(law, a, p, &res.r_star);
  bool boundary = std::fabs(inf_phi - 1.0) <= kBoundaryTol;

  res.sufficient.margin = 1.0 - inf_phi;
  res.sufficient.holds = inf_phi < 1.0 && !boundary && moment_finite(law, res.r_star);
  res.sufficient.boundary = boundary;

  res.necessary.margin = 1.0 - inf_phi;
  res.necessary.holds = inf_phi <= 1.0 || boundary;
  res.necessary.boundary = boundary;

  // Remark on sharpening: when the minimizer of g over [1, inf) lies below p,
  // the necessary condition tightens to e^a m^{1/p}(p) < 1; when it lies at
  // or beyond 2, to e^a m^{1/2}(2) < 1.
  double hp = h_fn(law, p);
  double h2 = h_fn(law, 2.0);
  if (hp > 0.0) {
    double v = std::exp(a + g_fn(law, p));
    res.sharpened = Verdict{v < 1.0, 1.0 - v, std::fabs(v - 1.0) <= kBoundaryTol};
  } else if (h2 <= 0.0) {
    double v = std::exp(a + g_fn(law, 2.0));
    res.sharpened = Verdict{v < 1.0, 1.0 - v, std::fabs(v - 1.0) <= kBoundaryTol};
  }
  return res;
}

Verdict check_main2(const OffspringLaw& law, double p, double a) {
  if (!(p >= 2.0)) throw PreconditionError("check_main2: p must be >= 2");
  if (!(a > 0.0)) throw PreconditionError("check_main2: a must be > 0");
  double crit = std::exp(a) * std::max(std::sqrt(mean_measure(law, 2.0)),
                                       std::pow(mean_measure(law, p), 1.0 / p));
  Verdict v;
  v.margin = 1.0 - crit;
  v.holds = crit < 1.0 && moment_finite(law, p);
  v.boundary = std::fabs(crit - 1.0) <= kBoundaryTol;
  return v;
}

CriterionReport analyze(const OffspringLaw& law, double p, double a) {
  CriterionReport rep;
  rep.p = p;
  rep.a = a;
  rep.degenerate = law.degenerate();
  MomentProfile prof = find_theta(law);
  rep.theta = prof.theta;
  rep.gamma = prof.gamma;
  rep.lp = check_lp(law, p);
  if (p > prof.theta && prof.interior_min) {
    QResult q = find_q(prof, p);
    if (!q.boundary) rep.q = q.q;
  }
  if (p > 1.0 && p < 2.0) rep.main1 = check_main1(law, p, a);
  if (p >= 2.0) rep.main2 = check_main2(law, p, a);
  return rep;
}

}  // namespace wbp
