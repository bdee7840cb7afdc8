#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wbp/errors.hpp"

namespace wbp {

/// Compensated summation; levels can hold millions of terms of widely
/// varying magnitude.
class KahanSum {
 public:
  void add(double x) {
    double y = x - carry_;
    double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Point estimate with its Monte Carlo standard error. `exact` marks values
/// obtained from closed forms or finite sums (std_error 0).
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long n = 0;
  bool exact = false;
};

/// Running mean/variance accumulator (compensated sums).
class MeanVar {
 public:
  void add(double x) {
    sum_.add(x);
    sumsq_.add(x * x);
    ++n_;
  }
  long count() const { return n_; }
  double mean() const { return n_ > 0 ? sum_.value() / n_ : 0.0; }
  double variance() const {
    if (n_ < 2) return 0.0;
    double m = mean();
    double v = (sumsq_.value() - n_ * m * m) / (n_ - 1);
    return v > 0.0 ? v : 0.0;
  }
  double std_error() const {
    return n_ > 0 ? std::sqrt(variance() / n_) : 0.0;
  }
  Estimate estimate() const { return {mean(), std_error(), n_, false}; }

 private:
  KahanSum sum_, sumsq_;
  long n_ = 0;
};

/// Self-normalized importance-sampling accumulator: estimate of
/// E_target f = sum(w f)/sum(w), delta-method standard error, and effective
/// sample size (sum w)^2 / sum w^2.
class WeightedMeanVar {
 public:
  void add(double f, double w) {
    sw_.add(w);
    swf_.add(w * f);
    sw2_.add(w * w);
    sw2f_.add(w * w * f);
    sw2f2_.add(w * w * f * f);
    ++n_;
  }
  long count() const { return n_; }
  double mean() const {
    double w = sw_.value();
    return w > 0.0 ? swf_.value() / w : 0.0;
  }
  double std_error() const {
    double w = sw_.value();
    if (w <= 0.0 || n_ < 2) return 0.0;
    double est = swf_.value() / w;
    double num = sw2f2_.value() - 2.0 * est * sw2f_.value() + est * est * sw2_.value();
    return num > 0.0 ? std::sqrt(num) / w : 0.0;
  }
  double effective_sample_size() const {
    double w2 = sw2_.value();
    return w2 > 0.0 ? sw_.value() * sw_.value() / w2 : 0.0;
  }
  Estimate estimate() const { return {mean(), std_error(), n_, false}; }

 private:
  KahanSum sw_, swf_, sw2_, sw2f_, sw2f2_;
  long n_ = 0;
};

inline Estimate mean_estimate(std::span<const double> xs) {
  MeanVar acc;
  for (double x : xs) acc.add(x);
  return acc.estimate();
}

struct WlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points_used = 0;
};

/// Weighted least squares of y against x with per-point sigmas. Points with
/// sigma <= 0 are treated as exact; if any such point exists all points get
/// equal weight (exact inputs should reproduce the exact line).
inline WlsFit weighted_linear_fit(std::span<const double> x,
                                  std::span<const double> y,
                                  std::span<const double> sigma) {
  std::size_t n = x.size();
  if (n < 2) throw InsufficientData("weighted_linear_fit: need >= 2 points");
  bool any_zero = false;
  for (std::size_t i = 0; i < n; ++i)
    if (sigma[i] <= 0.0) any_zero = true;
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = any_zero ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  double det = sw * swxx - swx * swx;
  if (det <= 0.0) throw InsufficientData("weighted_linear_fit: degenerate design");
  WlsFit fit;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.slope_se = any_zero ? 0.0 : std::sqrt(sw / det);
  fit.points_used = static_cast<int>(n);
  return fit;
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda).
inline double ks_q(double lambda) {
  if (lambda < 1e-12) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) *
                  std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw InsufficientData("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double xa = a[i], xb = b[j];
    if (xa <= xb) ++i;
    if (xb <= xa) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  double ne = std::sqrt(na * nb / (na + nb));
  double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return {d, ks_q(lambda)};
}

/// Critical value for the two-sample KS statistic at significance alpha.
inline double ks_critical(double alpha, std::size_t na, std::size_t nb) {
  double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt((static_cast<double>(na) + nb) /
                       (static_cast<double>(na) * nb));
}

}  // namespace wbp
