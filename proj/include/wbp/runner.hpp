#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "wbp/law.hpp"
#include "wbp/population.hpp"
#include "wbp/rng.hpp"

namespace wbp {

/// Replicate-level Monte Carlo controls. `seed` is the master seed; replicate
/// i always draws from Rng::substream(seed, i) regardless of worker count, so
/// aggregated results are scheduler-independent.
struct McOptions {
  long reps = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t cap = kDefaultPopulationCap;
};

/// Runs fn(replicate_index, rng) for every replicate on a small worker pool
/// and returns results indexed by replicate. Exceptions are rethrown on the
/// calling thread.
template <class T, class Fn>
std::vector<T> run_replicates(long reps, std::uint64_t seed, int workers, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(reps));
  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1) {
    for (long i = 0; i < reps; ++i) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = fn(i, rng);
    }
    return out;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    long i;
    while (!failed.load(std::memory_order_relaxed) &&
           (i = next.fetch_add(1)) < reps) {
      try {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = fn(i, rng);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  int n_threads = static_cast<int>(std::min<long>(workers, reps));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Ensemble of intrinsic-martingale rows: result[i][n] = W_n for replicate i,
/// n = 0..horizon. Throws PopulationOverflow if any replicate exceeds the cap.
std::vector<std::vector<double>> simulate_w_rows(const OffspringLaw& law,
                                                 int horizon,
                                                 const McOptions& opts);

/// Full trajectory ensemble (PopulationRun per replicate) for CSV export.
std::vector<PopulationRun> simulate_runs(const OffspringLaw& law, int n_max,
                                         std::span<const double> r_set,
                                         const McOptions& opts);

}  // namespace wbp
