#include "wbp/law.hpp"

#include <algorithm>
#include <cmath>

#include "wbp/errors.hpp"

namespace wbp {

namespace {

constexpr double kProbTol = 1e-12;

void validate_weights(const std::vector<double>& ws) {
  for (double w : ws) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw PreconditionError("offspring law: weights must be finite and nonnegative");
  }
}

int positive_count(const std::vector<double>& ws) {
  int c = 0;
  for (double w : ws)
    if (w > 0.0) ++c;
  return c;
}

// P{W_1 = 1} = 1 detection; only a DiscreteTable can be degenerate among the
// built-in families (the continuous families put no atom at 1, Poisson has
// random J).
bool detect_degenerate(const OffspringLaw::Family& fam) {
  if (const auto* t = std::get_if<DiscreteTable>(&fam)) {
    for (const auto& o : t->outcomes) {
      if (o.prob <= 0.0) continue;
      double s = 0.0;
      for (double w : o.weights) s += w;
      if (std::fabs(s - 1.0) > kProbTol) return false;
    }
    return true;
  }
  return false;
}

}  // namespace

OffspringLaw::OffspringLaw(Family family, bool require_supercritical)
    : family_(std::move(family)) {
  if (const auto* u = std::get_if<IidScaledUniform>(&family_)) {
    if (u->child_count < 2)
      throw PreconditionError("IidScaledUniform: child count must be >= 2");
  } else if (const auto* l = std::get_if<LogNormalWeights>(&family_)) {
    if (l->child_count < 2)
      throw PreconditionError("LogNormalWeights: child count must be >= 2");
    if (!(l->sigma2 > 0.0))
      throw PreconditionError("LogNormalWeights: sigma2 must be > 0");
  } else if (const auto* p = std::get_if<PoissonGW>(&family_)) {
    if (!(p->lambda > 1.0))
      throw PreconditionError("PoissonGW: lambda must be > 1");
  } else if (const auto* t = std::get_if<DiscreteTable>(&family_)) {
    if (t->outcomes.empty())
      throw PreconditionError("DiscreteTable: needs at least one outcome");
    double psum = 0.0;
    for (const auto& o : t->outcomes) {
      if (!(o.prob >= 0.0))
        throw PreconditionError("DiscreteTable: probabilities must be >= 0");
      validate_weights(o.weights);
      psum += o.prob;
    }
    if (std::fabs(psum - 1.0) > kProbTol)
      throw PreconditionError("DiscreteTable: probabilities must sum to 1");
  } else if (const auto* tr = std::get_if<Truncated>(&family_)) {
    if (!tr->base) throw PreconditionError("Truncated: missing base law");
    if (!(tr->cutoff >= 1.0))
      throw PreconditionError("Truncated: cutoff K must be >= 1");
  }
  if (require_supercritical && mean_offspring() <= 1.0)
    throw PreconditionError("offspring law: mean offspring E J must be > 1");
  degenerate_ = detect_degenerate(family_);
}

std::string OffspringLaw::family_name() const {
  struct Visitor {
    std::string operator()(const IidScaledUniform&) const { return "iid_scaled_uniform"; }
    std::string operator()(const LogNormalWeights&) const { return "log_normal"; }
    std::string operator()(const PoissonGW&) const { return "poisson_gw"; }
    std::string operator()(const DiscreteTable&) const { return "discrete_table"; }
    std::string operator()(const Truncated&) const { return "truncated"; }
  };
  return std::visit(Visitor{}, family_);
}

std::optional<double> OffspringLaw::litter_sum_bound() const {
  if (const auto* u = std::get_if<IidScaledUniform>(&family_)) {
    (void)u;
    return 2.0;  // W_1 = (2/b) sum of b uniforms <= 2
  }
  if (const auto* t = std::get_if<DiscreteTable>(&family_)) {
    double best = 0.0;
    for (const auto& o : t->outcomes) {
      if (o.prob <= 0.0) continue;
      double s = 0.0;
      for (double w : o.weights) s += w;
      best = std::max(best, s);
    }
    return best;
  }
  if (const auto* tr = std::get_if<Truncated>(&family_)) {
    // Thinning only removes weight; litter sums are capped by K anyway.
    if (auto b = tr->base->litter_sum_bound()) return std::min(*b, tr->cutoff);
    return tr->cutoff;
  }
  return std::nullopt;
}

double OffspringLaw::mean_offspring() const {
  if (const auto* u = std::get_if<IidScaledUniform>(&family_))
    return static_cast<double>(u->child_count);
  if (const auto* l = std::get_if<LogNormalWeights>(&family_))
    return static_cast<double>(l->child_count);
  if (const auto* p = std::get_if<PoissonGW>(&family_)) return p->lambda;
  if (const auto* t = std::get_if<DiscreteTable>(&family_)) {
    double m = 0.0;
    for (const auto& o : t->outcomes) m += o.prob * positive_count(o.weights);
    return m;
  }
  const auto& tr = std::get<Truncated>(family_);
  // No closed form in general; use the base law's count as an upper hint.
  return tr.base->mean_offspring();
}

namespace {

Litter apply_truncation(Litter litter, double cutoff) {
  double floor_w = 1.0 / cutoff;
  if (litter.sum() > cutoff) {
    litter.weights.assign(litter.weights.size(), 0.0);
    return litter;
  }
  for (double& w : litter.weights)
    if (w < floor_w) w = 0.0;
  return litter;
}

}  // namespace

Litter sample_litter(const OffspringLaw& law, Rng& rng) {
  struct Visitor {
    Rng& rng;
    Litter operator()(const IidScaledUniform& u) const {
      Litter l;
      l.weights.resize(u.child_count);
      double scale = 2.0 / u.child_count;
      for (double& w : l.weights) w = scale * rng.uniform();
      return l;
    }
    Litter operator()(const LogNormalWeights& ln) const {
      Litter l;
      l.weights.resize(ln.child_count);
      double sigma = std::sqrt(ln.sigma2);
      double scale = 1.0 / (ln.child_count * std::exp(ln.sigma2 / 2.0));
      for (double& w : l.weights) w = scale * std::exp(rng.normal(sigma));
      return l;
    }
    Litter operator()(const PoissonGW& p) const {
      long j = rng.poisson(p.lambda);
      Litter l;
      l.weights.assign(static_cast<std::size_t>(j), 1.0 / p.lambda);
      return l;
    }
    Litter operator()(const DiscreteTable& t) const {
      double u = rng.uniform();
      double acc = 0.0;
      for (const auto& o : t.outcomes) {
        acc += o.prob;
        if (u < acc) return Litter{o.weights};
      }
      return Litter{t.outcomes.back().weights};
    }
    Litter operator()(const Truncated& tr) const {
      return apply_truncation(sample_litter(*tr.base, rng), tr.cutoff);
    }
  };
  return std::visit(Visitor{rng}, law.family());
}

namespace {

double pow_weight(double w, double r) {
  if (w == 0.0) return 0.0;
  return std::pow(w, r);
}

DiscreteTable truncate_table(const DiscreteTable& t, double cutoff) {
  DiscreteTable out;
  out.outcomes.reserve(t.outcomes.size());
  double floor_w = 1.0 / cutoff;
  for (const auto& o : t.outcomes) {
    DiscreteTable::Outcome thinned;
    thinned.prob = o.prob;
    thinned.weights = o.weights;
    double s = 0.0;
    for (double w : o.weights) s += w;
    if (s > cutoff) {
      thinned.weights.assign(o.weights.size(), 0.0);
    } else {
      for (double& w : thinned.weights)
        if (w < floor_w) w = 0.0;
    }
    out.outcomes.push_back(std::move(thinned));
  }
  return out;
}

double mc_mean_measure(const OffspringLaw& law, double r) {
  Rng rng = Rng::substream(law.mc_seed(), 0x6d656173757265ULL ^ static_cast<std::uint64_t>(r * 4096.0));
  MeanVar acc;
  for (long i = 0; i < law.mc_reps(); ++i) {
    Litter l = sample_litter(law, rng);
    KahanSum s;
    for (double w : l.weights) s.add(pow_weight(w, r));
    acc.add(s.value());
  }
  return acc.mean();
}

}  // namespace

double mean_measure(const OffspringLaw& law, double r) {
  if (!(r > 0.0)) throw DomainError("mean_measure: r must be > 0");
  struct Visitor {
    const OffspringLaw& law;
    double r;
    double operator()(const IidScaledUniform& u) const {
      double b = u.child_count;
      return b * std::pow(2.0 / b, r) / (r + 1.0);
    }
    double operator()(const LogNormalWeights& ln) const {
      double b = ln.child_count;
      return std::pow(b, 1.0 - r) * std::exp(ln.sigma2 * r * (r - 1.0) / 2.0);
    }
    double operator()(const PoissonGW& p) const {
      return std::pow(p.lambda, 1.0 - r);
    }
    double operator()(const DiscreteTable& t) const {
      KahanSum s;
      for (const auto& o : t.outcomes)
        for (double w : o.weights) s.add(o.prob * pow_weight(w, r));
      return s.value();
    }
    double operator()(const Truncated& tr) const {
      if (const auto* base_table = std::get_if<DiscreteTable>(&tr.base->family())) {
        DiscreteTable thinned = truncate_table(*base_table, tr.cutoff);
        KahanSum s;
        for (const auto& o : thinned.outcomes)
          for (double w : o.weights) s.add(o.prob * pow_weight(w, r));
        return s.value();
      }
      return mc_mean_measure(law, r);
    }
  };
  return std::visit(Visitor{law, r}, law.family());
}

double mean_measure_derivative(const OffspringLaw& law, double r) {
  if (!(r > 0.0)) throw DomainError("mean_measure_derivative: r must be > 0");
  struct Visitor {
    const OffspringLaw& law;
    double r;
    double operator()(const IidScaledUniform& u) const {
      double b = u.child_count;
      double m = b * std::pow(2.0 / b, r) / (r + 1.0);
      return m * (std::log(2.0 / b) - 1.0 / (r + 1.0));
    }
    double operator()(const LogNormalWeights& ln) const {
      double b = ln.child_count;
      double m = std::pow(b, 1.0 - r) * std::exp(ln.sigma2 * r * (r - 1.0) / 2.0);
      return m * (-std::log(b) + ln.sigma2 * (2.0 * r - 1.0) / 2.0);
    }
    double operator()(const PoissonGW& p) const {
      return -std::log(p.lambda) * std::pow(p.lambda, 1.0 - r);
    }
    double operator()(const DiscreteTable& t) const {
      KahanSum s;
      for (const auto& o : t.outcomes)
        for (double w : o.weights)
          if (w > 0.0) s.add(o.prob * std::pow(w, r) * std::log(w));
      return s.value();
    }
    double operator()(const Truncated&) const {
      // No closed form; central difference, step max(1e-6, 1e-6 r).
      double h = std::max(1e-6, 1e-6 * r);
      return (mean_measure(law, r + h) - mean_measure(law, r - h)) / (2.0 * h);
    }
  };
  return std::visit(Visitor{law, r}, law.family());
}

OffspringLaw normalize(const OffspringLaw& law) {
  double m1 = mean_measure(law, 1.0);
  if (!(m1 > 0.0) || !std::isfinite(m1))
    throw DomainError("normalize: m(1) must be finite and positive");
  if (const auto* t = std::get_if<DiscreteTable>(&law.family())) {
    DiscreteTable scaled = *t;
    for (auto& o : scaled.outcomes)
      for (double& w : o.weights) w /= m1;
    return OffspringLaw(std::move(scaled));
  }
  // The parametric families have m(1) = 1 by construction; truncated laws
  // are thinnings used for m-curve comparisons and are returned unchanged
  // when already normalized.
  if (std::fabs(m1 - 1.0) <= 1e-12) return law;
  throw DomainError("normalize: unsupported for non-discrete laws with m(1) != 1");
}

namespace {

// Exact finite-sum moment for a DiscreteTable: E f(W_1).
template <class F>
double table_moment(const DiscreteTable& t, F&& f) {
  KahanSum s;
  for (const auto& o : t.outcomes) {
    double w1 = 0.0;
    for (double w : o.weights) w1 += w;
    s.add(o.prob * f(w1));
  }
  return s.value();
}

// MC moment of f(W_1) with a divergence diagnostic: if the single largest
// sample carries more than 20% of the total, the p-th moment is flagged as
// outside the (empirical) moment domain.
template <class F>
Estimate mc_moment(const OffspringLaw& law, F&& f, std::uint64_t salt) {
  Rng rng = Rng::substream(law.mc_seed(), salt);
  MeanVar acc;
  double max_term = 0.0;
  for (long i = 0; i < law.mc_reps(); ++i) {
    double v = f(sample_litter(law, rng).sum());
    acc.add(v);
    max_term = std::max(max_term, v);
  }
  double total = acc.mean() * acc.count();
  if (total > 0.0 && max_term > 0.2 * total)
    throw DivergentMoment("mc_moment: tail-dominated sample, moment looks divergent");
  return acc.estimate();
}

// DiscreteTable after thinning, when the law is Truncated over a table.
std::optional<DiscreteTable> truncated_table(const OffspringLaw& law) {
  if (const auto* tr = std::get_if<Truncated>(&law.family()))
    if (const auto* bt = std::get_if<DiscreteTable>(&tr->base->family()))
      return truncate_table(*bt, tr->cutoff);
  return std::nullopt;
}

}  // namespace

double mu2_exact(const OffspringLaw& law) {
  struct Visitor {
    const OffspringLaw& law;
    double operator()(const IidScaledUniform& u) const {
      return 1.0 / (3.0 * u.child_count);  // Var((2/b) sum U_i)
    }
    double operator()(const LogNormalWeights& ln) const {
      return (std::exp(ln.sigma2) - 1.0) / ln.child_count;
    }
    double operator()(const PoissonGW& p) const { return 1.0 / p.lambda; }
    double operator()(const DiscreteTable& t) const {
      return table_moment(t, [](double w1) { return (w1 - 1.0) * (w1 - 1.0); });
    }
    double operator()(const Truncated&) const {
      if (auto t = truncated_table(law))
        return table_moment(*t, [](double w1) { return (w1 - 1.0) * (w1 - 1.0); });
      return mc_moment(law, [](double w1) { return (w1 - 1.0) * (w1 - 1.0); },
                       0x6d753278ULL)
          .value;
    }
  };
  return std::visit(Visitor{law}, law.family());
}

Estimate w1_moment(const OffspringLaw& law, double p) {
  if (!(p > 1.0)) throw PreconditionError("w1_moment: p must be > 1");
  if (const auto* t = std::get_if<DiscreteTable>(&law.family())) {
    double v = table_moment(*t, [p](double w1) { return pow_weight(w1, p); });
    return {v, 0.0, 0, true};
  }
  if (auto thinned = truncated_table(law)) {
    double v = table_moment(*thinned, [p](double w1) { return pow_weight(w1, p); });
    return {v, 0.0, 0, true};
  }
  if (p == 2.0 && !std::holds_alternative<Truncated>(law.family()))
    return {1.0 + mu2_exact(law), 0.0, 0, true};
  return mc_moment(law, [p](double w1) { return pow_weight(w1, p); },
                   0x77316d6f6dULL ^ static_cast<std::uint64_t>(p * 4096.0));
}

Estimate mu_p(const OffspringLaw& law, double p) {
  if (!(p > 1.0)) throw PreconditionError("mu_p: p must be > 1");
  if (const auto* t = std::get_if<DiscreteTable>(&law.family())) {
    double v = table_moment(*t, [p](double w1) { return std::pow(std::fabs(w1 - 1.0), p); });
    return {v, 0.0, 0, true};
  }
  if (auto thinned = truncated_table(law)) {
    double v = table_moment(*thinned, [p](double w1) { return std::pow(std::fabs(w1 - 1.0), p); });
    return {v, 0.0, 0, true};
  }
  if (p == 2.0 && !std::holds_alternative<Truncated>(law.family()))
    return {mu2_exact(law), 0.0, 0, true};
  return mc_moment(law, [p](double w1) { return std::pow(std::fabs(w1 - 1.0), p); },
                   0x6d755f70ULL ^ static_cast<std::uint64_t>(p * 4096.0));
}

namespace catalog {

OffspringLaw binary_deterministic() {
  return OffspringLaw(DiscreteTable{{{1.0, {0.5, 0.5}}}});
}

OffspringLaw d1() {
  return OffspringLaw(DiscreteTable{{{0.5, {0.75, 0.75}}, {0.5, {0.5}}}});
}

OffspringLaw uniform2() { return OffspringLaw(IidScaledUniform{2}); }

OffspringLaw log_normal_critical() {
  // theta = 1.5: sigma2 = 2 ln 2 / theta^2, so m(2.25) = 1 exactly.
  return OffspringLaw(LogNormalWeights{2, 2.0 * std::log(2.0) / 2.25});
}

OffspringLaw poisson(double lambda) { return OffspringLaw(PoissonGW{lambda}); }

std::vector<std::pair<std::string, OffspringLaw>> nondegenerate() {
  return {{"d1", d1()},
          {"uniform2", uniform2()},
          {"log_normal_critical", log_normal_critical()},
          {"poisson2", poisson(2.0)}};
}

std::vector<std::pair<std::string, OffspringLaw>> all() {
  auto laws = nondegenerate();
  laws.insert(laws.begin(), {"binary_deterministic", binary_deterministic()});
  return laws;
}

}  // namespace catalog

}  // namespace wbp
