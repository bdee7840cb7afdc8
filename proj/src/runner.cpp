#include "wbp/runner.hpp"

#include "wbp/errors.hpp"

namespace wbp {

std::vector<std::vector<double>> simulate_w_rows(const OffspringLaw& law,
                                                 int horizon,
                                                 const McOptions& opts) {
  return run_replicates<std::vector<double>>(
      opts.reps, opts.seed, opts.workers, [&](long, Rng& rng) {
        thread_local std::vector<double> level, next;
        level.assign(1, 1.0);
        std::vector<double> w(static_cast<std::size_t>(horizon) + 1);
        w[0] = 1.0;
        long dropped = 0;
        for (int n = 1; n <= horizon; ++n) {
          if (!detail::advance_level(law, level, next, opts.cap, rng, dropped))
            throw PopulationOverflow("simulate_w_rows: level exceeded cap");
          level.swap(next);
          KahanSum z;
          for (double x : level) z.add(x);
          w[static_cast<std::size_t>(n)] = z.value();
        }
        return w;
      });
}

std::vector<PopulationRun> simulate_runs(const OffspringLaw& law, int n_max,
                                         std::span<const double> r_set,
                                         const McOptions& opts) {
  return run_replicates<PopulationRun>(
      opts.reps, opts.seed, opts.workers, [&](long, Rng& rng) {
        return run_population(law, n_max, r_set, opts.cap, rng);
      });
}

}  // namespace wbp
