#pragma once

#include <vector>

#include "wbp/law.hpp"
#include "wbp/moments.hpp"
#include "wbp/population.hpp"
#include "wbp/runner.hpp"
#include "wbp/stats.hpp"

namespace wbp {

/// b_n = sum_{k=0}^n e^{ak} = (e^a - 1)^{-1} (e^{a(n+1)} - 1), a > 0.
double b_coeff(double a, int n);

/// Partial sums of the three series built on one trajectory, with the limit
/// W replaced by the surrogate W_N (N = trajectory horizon):
///   a_partial[m] = sum_{n<=m} e^{an} (W_N - W_n)          (A_m)
///   a_prime[m]   = sum_{k<=m} b_k (W_{k+1} - W_k)          (A'_m)
///   a_hat[m]     = sum_{k<=m} e^{ak} (W_{k+1} - W_k)       (A-hat_m)
/// for m = 0..N-1, plus r_sum = sum_{k<N} e^{2ak} (W_{k+1}-W_k)^2.
struct SeriesTrail {
  double a = 0.0;
  double p = 0.0;
  std::vector<double> w;  // W_0..W_N
  std::vector<double> a_partial, a_prime, a_hat;
  double r_sum = 0.0;

  int horizon() const { return static_cast<int>(w.size()) - 1; }
};

SeriesTrail build_trail(const PopulationRun& traj, double a, double p);
SeriesTrail build_trail(const std::vector<double>& w_row, double a, double p);

/// Max over m < N of |A_m - b_m(W_N - W_m) - A'_{m-1}| / (1 + |A_m|): the
/// finite telescoping identity, which holds path by path.
double path_identity_max_rel_error(const SeriesTrail& trail);

/// Residual of A'_{N-1} = e^a/(e^a-1) A-hat_{N-1} - (W_N - 1)/(e^a - 1).
double decomposition_residual(const SeriesTrail& trail);

/// One point of an exponential-rate series.
struct RatePoint {
  int n = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  long contributions = 0;
  double predicted = 0.0;  // reference curve value (exact for p = 2)
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points_used = 0;
  int n_lo = 0, n_hi = 0;
};

/// Weighted log-linear fit of estimate against n. Points with nonpositive
/// estimates or fewer than 30 contributions are excluded; fewer than 4
/// usable points throws InsufficientData.
RateFit fit_rate(std::span<const RatePoint> values);

/// Number of extra generations needed for the surrogate tail to fall below
/// 1% of the compared quantity: ceil(ln 100 / -ln rho) with
/// rho = max(m(2)^{p/2}, m(p)). PreconditionError when rho >= 1.
int auto_horizon_gap(const OffspringLaw& law, double p);

struct IncrementLp {
  Estimate scaled_increment;  // e^{pan} E|W_{n+1} - W_n|^p
  Estimate tail_moment;       // E|W_N - W_n|^p with surrogate W_N
  int horizon = 0;
};

/// MC estimates of the scaled increment moment and the surrogate tail
/// moment at generation n. horizon < 0 selects N = n + auto_horizon_gap.
IncrementLp increment_lp(const OffspringLaw& law, double p, double a, int n,
                         const McOptions& opts, int horizon = -1);

/// The scaled-increment series e^{pan} E|W_{n+1}-W_n|^p for n = 0..n_max from
/// one common trajectory ensemble. The predicted column is the exact curve
/// mu_2 (e^{2a} m(2))^n for p = 2 and a slope-anchored reference otherwise.
std::vector<RatePoint> increment_rate_series(const OffspringLaw& law, double p,
                                             double a, int n_max,
                                             const McOptions& opts);

/// Theoretical log-slope of the scaled-increment series.
double predicted_increment_log_slope(const OffspringLaw& law, double p, double a);

/// Burkholder sandwich c_p ||sqrt(R)||_p <= ||A-hat||_p <= C_p ||sqrt(R)||_p
/// with c_p = (p-1)/(18 p^{3/2}) and C_p = 18 p^{3/2}/(p-1)^{1/2}, estimated
/// with common random numbers.
struct BurkholderResult {
  double c_p = 0.0, big_c_p = 0.0;
  double lower = 0.0, middle = 0.0, upper = 0.0;
  double lower_se = 0.0, middle_se = 0.0, upper_se = 0.0;
  bool holds = false;
};

BurkholderResult burkholder_check(const OffspringLaw& law, double p, double a,
                                  int horizon, const McOptions& opts);

double burkholder_c(double p);
double burkholder_big_c(double p);

/// Two-sample comparison of A-hat against one unfolding of its fixed-point
/// equation e^a sum_v L_v A-hat_v + W_1 - 1 (independent child replicas).
struct FixpointResult {
  KsResult ks;
  Estimate lhs_mean, rhs_mean;
};

FixpointResult fixpoint_check(const OffspringLaw& law, double p, double a,
                              int horizon, const McOptions& opts);

/// Growth diagnostic for E W_n^p against the polynomial-times-exponential
/// envelope (kappa + c n) e^{sn}: s is the fitted exponential factor
/// (compare to ln m(p) when m(p) > 1 and to 0 when m(p) = 1), kappa and c
/// the polynomial part. `plain` is the raw log-linear fit, reported for
/// reference; `poly_degree` is a loose log-log trend estimate.
struct MomentGrowth {
  std::vector<RatePoint> values;
  double exp_log_slope = 0.0;
  double kappa = 0.0, c = 0.0;
  double predicted_log_slope = 0.0;
  RateFit plain;
  double poly_degree = 0.0;
  bool bounded = false;  // m(p) < 1 regime: max estimate <= 1.1 * final
};

MomentGrowth moment_growth(const OffspringLaw& law, double p, int n_max,
                           const McOptions& opts);

}  // namespace wbp
