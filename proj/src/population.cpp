#include "wbp/population.hpp"

#include <algorithm>
#include <cmath>

#include "wbp/errors.hpp"

namespace wbp {

namespace detail {

bool advance_level(const OffspringLaw& law, const std::vector<double>& current,
                   std::vector<double>& next, std::size_t cap, Rng& rng,
                   long& dropped) {
  next.clear();
  next.reserve(current.size() + current.size() / 2);
  for (double parent : current) {
    Litter litter = sample_litter(law, rng);
    for (double edge : litter.weights) {
      double w = parent * edge;
      if (w < kWeightFloor) {
        if (edge > 0.0) ++dropped;
        continue;
      }
      next.push_back(w);
      if (next.size() > cap) return false;
    }
  }
  return true;
}

}  // namespace detail

namespace {

TrajectoryRow make_row(int n, const std::vector<double>& level,
                       std::span<const double> r_set,
                       std::span<const double> m_r) {
  TrajectoryRow row;
  row.n = n;
  row.pop_size = level.size();
  KahanSum z;
  double mx = 0.0;
  for (double w : level) {
    z.add(w);
    mx = std::max(mx, w);
  }
  row.w = z.value();  // m(1) = 1 for normalized laws
  row.max_weight = mx;
  row.w_r.resize(r_set.size());
  for (std::size_t i = 0; i < r_set.size(); ++i) {
    KahanSum zr;
    for (double w : level) zr.add(std::pow(w, r_set[i]));
    row.w_r[i] = zr.value() / std::pow(m_r[i], n);
  }
  return row;
}

}  // namespace

PopulationRun run_population(const OffspringLaw& law, int n_max,
                             std::span<const double> r_set, std::size_t cap,
                             Rng& rng) {
  if (cap < 1) throw PreconditionError("run_population: cap must be >= 1");
  if (n_max < 0) throw PreconditionError("run_population: n_max must be >= 0");
  double m1 = mean_measure(law, 1.0);
  if (std::fabs(m1 - 1.0) > 1e-9)
    throw PreconditionError("run_population: law must be normalized (m(1) = 1)");

  std::vector<double> m_r(r_set.size());
  for (std::size_t i = 0; i < r_set.size(); ++i)
    m_r[i] = mean_measure(law, r_set[i]);

  PopulationRun run;
  run.r_set.assign(r_set.begin(), r_set.end());
  std::vector<double> level{1.0};
  std::vector<double> next;
  run.rows.push_back(make_row(0, level, r_set, m_r));
  for (int n = 1; n <= n_max; ++n) {
    if (!detail::advance_level(law, level, next, cap, rng, run.dropped_weights)) {
      run.overflowed = true;
      run.overflow_generation = n;
      return run;
    }
    level.swap(next);
    run.rows.push_back(make_row(n, level, r_set, m_r));
  }
  return run;
}

OffspringLaw truncate_law(const OffspringLaw& law, double K) {
  if (!(K >= 1.0)) throw PreconditionError("truncate_law: K must be >= 1");
  if (const auto* t = std::get_if<DiscreteTable>(&law.family())) {
    DiscreteTable thinned;
    thinned.outcomes.reserve(t->outcomes.size());
    double floor_w = 1.0 / K;
    for (const auto& o : t->outcomes) {
      DiscreteTable::Outcome out;
      out.prob = o.prob;
      out.weights = o.weights;
      double s = 0.0;
      for (double w : o.weights) s += w;
      if (s > K) {
        out.weights.assign(o.weights.size(), 0.0);
      } else {
        for (double& w : out.weights)
          if (w < floor_w) w = 0.0;
      }
      thinned.outcomes.push_back(std::move(out));
    }
    return OffspringLaw(std::move(thinned), /*require_supercritical=*/false);
  }
  auto base = std::make_shared<const OffspringLaw>(law);
  return OffspringLaw(Truncated{base, K}, /*require_supercritical=*/false);
}

namespace {

struct Enumerator {
  const DiscreteTable& table;
  int target_gen;
  const std::function<double(std::span<const double>)>& f;
  KahanSum acc;

  void level(const std::vector<double>& weights, double prob, int gen) {
    if (gen == target_gen) {
      acc.add(prob * f(weights));
      return;
    }
    std::vector<double> next;
    assign(weights, 0, next, prob, gen);
  }

  // Depth-major, fixed ordering: individuals within a level take their
  // outcomes left to right.
  void assign(const std::vector<double>& weights, std::size_t idx,
              std::vector<double>& next, double prob, int gen) {
    if (idx == weights.size()) {
      level(next, prob, gen + 1);
      return;
    }
    for (const auto& o : table.outcomes) {
      if (o.prob <= 0.0) continue;
      std::size_t mark = next.size();
      for (double w : o.weights) {
        double child = weights[idx] * w;
        if (child > 0.0) next.push_back(child);
      }
      assign(weights, idx + 1, next, prob * o.prob, gen);
      next.resize(mark);
    }
  }
};

}  // namespace

double exact_functional(const OffspringLaw& law, int n,
                        const std::function<double(std::span<const double>)>& f) {
  const auto* table = std::get_if<DiscreteTable>(&law.family());
  if (!table)
    throw PreconditionError("exact_functional: requires a DiscreteTable law");
  if (n < 0 || n > 4)
    throw PreconditionError("exact_functional: n must lie in [0,4]");

  // Worst case: outcomes^(nodes requiring an assignment), nodes counted with
  // the largest positive-child count.
  std::size_t max_children = 0;
  std::size_t live_outcomes = 0;
  for (const auto& o : table->outcomes) {
    if (o.prob <= 0.0) continue;
    ++live_outcomes;
    std::size_t c = 0;
    for (double w : o.weights)
      if (w > 0.0) ++c;
    max_children = std::max(max_children, c);
  }
  double nodes = 0.0;
  double level_size = 1.0;
  for (int g = 0; g < n; ++g) {
    nodes += level_size;
    level_size *= static_cast<double>(max_children);
  }
  if (live_outcomes > 1 &&
      nodes * std::log(static_cast<double>(live_outcomes)) > std::log(1e7))
    throw EnumerationTooLarge("exact_functional: configuration count exceeds 1e7");

  Enumerator en{*table, n, f, {}};
  en.level({1.0}, 1.0, 0);
  return en.acc.value();
}

Estimate estimate_s_n(const OffspringLaw& law, int n, double r, double p,
                      long reps, Rng& rng) {
  if (!(r >= 1.0 && r <= 2.0))
    throw PreconditionError("estimate_s_n: r must lie in [1,2]");
  if (!(p > 1.0 && p < 2.0))
    throw PreconditionError("estimate_s_n: p must lie in (1,2)");
  if (n == 0) return {1.0, 0.0, reps, true};  // Z_0^{(r)} = 1
  MeanVar acc;
  std::vector<double> level, next;
  long dropped = 0;
  for (long rep = 0; rep < reps; ++rep) {
    level.assign(1, 1.0);
    for (int g = 0; g < n; ++g) {
      if (!detail::advance_level(law, level, next, kDefaultPopulationCap, rng,
                                 dropped))
        throw PopulationOverflow("estimate_s_n: level exceeded population cap");
      level.swap(next);
    }
    KahanSum zr;
    for (double w : level) zr.add(std::pow(w, r));
    acc.add(std::pow(zr.value(), p / r));
  }
  return acc.estimate();
}

}  // namespace wbp
