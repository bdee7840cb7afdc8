#pragma once

#include <optional>

#include "wbp/law.hpp"

namespace wbp {

/// Spectral summary of a law: the minimizer machinery for
/// g(r) = log m(r) / r and h(r) = r m'(r)/m(r) - log m(r).
struct MomentProfile {
  OffspringLaw law;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  double theta = 2.0;       // 2 ∧ arg inf_{r >= 1} g(r)
  double gamma = 0.0;       // m(theta)^{1/theta}
  bool interior_min = false;  // arg inf g < 2
};

/// g(r) = r^{-1} log m(r). DomainError outside the finiteness domain or when
/// m(r) is not positive.
double g_fn(const OffspringLaw& law, double r);
double h_fn(const OffspringLaw& law, double r);
inline double g_fn(const MomentProfile& prof, double r) { return g_fn(prof.law, r); }
inline double h_fn(const MomentProfile& prof, double r) { return h_fn(prof.law, r); }

/// Locates theta = 2 ∧ arg inf g on [1,2]: h(2) <= 0 means the minimum sits
/// at or beyond 2 (theta = 2); otherwise h has its unique zero in (1,2) and
/// is bisected to |h| < 1e-10.
MomentProfile find_theta(const OffspringLaw& law);

struct QResult {
  double q = 1.0;
  bool boundary = false;  // g(p) >= g(1) = 0: the conjugate degenerates to 1
};

/// The unique q in (1, theta) with g(q) = g(p), for p > theta.
QResult find_q(const MomentProfile& prof, double p);

/// lim_n s_n(r)^{1/n} from the piecewise characterization: m(r)^{p/r} below
/// the critical point, gamma^p (p <= theta) or m(p) (p > theta) above it.
double predicted_rate(const MomentProfile& prof, double p, double r);

/// One criterion outcome with a signed margin; `boundary` marks the
/// inconclusive equality edge (possible only when the infimum is attained
/// inside [p,2)).
struct Verdict {
  bool holds = false;
  double margin = 0.0;
  bool boundary = false;
};

struct Main1Result {
  Verdict sufficient;       // exists r in [p,2]: E W_1^r < inf, e^a m^{1/r}(r) < 1
  double r_star = 0.0;      // minimizer of e^a m^{1/r}(r) over [p,2]
  Verdict necessary;        // inf_{r in [p,2]} e^a m^{1/r}(r) <= 1
  std::optional<Verdict> sharpened;  // strict version when arg inf g < p or >= 2
};

/// L_p-convergence of W_n itself: E W_1^p < inf and m(p) < 1. Margin is
/// 1 - m(p).
Verdict check_lp(const OffspringLaw& law, double p);

/// Criteria for 1 < p < 2 (sufficient and necessary halves, plus the
/// sharpened necessary condition where available).
Main1Result check_main1(const OffspringLaw& law, double p, double a);

/// Equivalent criterion for p >= 2: e^a (m^{1/2}(2) ∨ m^{1/p}(p)) < 1.
Verdict check_main2(const OffspringLaw& law, double p, double a);

/// Full report for one (law, p, a) configuration.
struct CriterionReport {
  double p = 0.0;
  double a = 0.0;
  bool degenerate = false;
  double theta = 0.0;
  double gamma = 0.0;
  std::optional<double> q;
  Verdict lp;
  std::optional<Main1Result> main1;  // present when p in (1,2)
  std::optional<Verdict> main2;      // present when p >= 2
};

CriterionReport analyze(const OffspringLaw& law, double p, double a);

}  // namespace wbp
