#pragma once

// Direct-search tuning of the PRWB lane count. Candidates are the divisors of
// k; each trial is verified against the oracle before it is timed.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/compare.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"
#include "bsrspmm/kernels.hpp"
#include "bsrspmm/rng.hpp"
#include "bsrspmm/timing.hpp"
#include "bsrspmm/work_pool.hpp"

namespace bsrspmm {

/// Mirrors the per-block thread ceiling of GPU thread blocks.
inline constexpr std::size_t default_lane_cap = 1024;

/// Upper bound on trials per tuning run.
inline constexpr std::size_t default_tune_budget = 200;

struct SearchSpace {
  std::vector<std::size_t> candidates;  // ascending, unique, all divide k
};

/// Divisors of k not exceeding cap, ascending.
inline SearchSpace candidate_lanes(std::size_t k, std::size_t cap = default_lane_cap) {
  if (k == 0 || cap == 0) throw Error(Errc::invalid_argument, "k and cap must be >= 1");
  SearchSpace space;
  std::vector<std::size_t> large;
  for (std::size_t d = 1; d * d <= k; ++d) {
    if (k % d != 0) continue;
    if (d <= cap) space.candidates.push_back(d);
    const std::size_t q = k / d;
    if (q != d && q <= cap) large.push_back(q);
  }
  space.candidates.insert(space.candidates.end(), large.rbegin(), large.rend());
  return space;
}

struct TuningRecord {
  ProblemShape shape;
  double sparsity = 0.0;
  std::uint64_t seed = 0;
  Schedule schedule;
  std::int64_t median_ns = 0;
  std::int64_t min_ns = 0;
  std::int64_t mean_ns = 0;
  std::size_t repeats = 0;
  std::string timestamp;  // ISO-8601, UTC
  std::string env;
  bool valid = true;

  friend bool operator==(const TuningRecord&, const TuningRecord&) = default;
};

struct TuneResult {
  TuningRecord best;
  std::vector<TuningRecord> all_trials;  // in evaluation order
  std::size_t budget_used = 0;
};

/// Metadata and knobs for a tuning run. The problem itself is passed
/// separately as (X, W).
struct TuneOptions {
  std::size_t budget = default_tune_budget;
  std::size_t repeats = 11;       // odd, >= 3
  std::size_t warmup = 1;
  std::uint64_t plan_seed = 0;    // subsample when budget < |space|
  std::optional<double> tolerance;  // default: oracle_tolerance<T>
  double sparsity = 0.0;          // copied into records
  std::uint64_t data_seed = 0;    // copied into records
  std::string env;                // empty: default_env_tag()
  Executor executor;
};

inline std::string iso8601_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string default_env_tag(const WorkPool& pool = default_pool()) {
  std::string tag = "cpu;workers=" + std::to_string(pool.workers()) +
                    ";hw_threads=" + std::to_string(std::thread::hardware_concurrency());
#if defined(__clang__)
  tag += ";clang-" + std::to_string(__clang_major__);
#elif defined(__GNUC__)
  tag += ";gcc-" + std::to_string(__GNUC__);
#endif
  return tag;
}

/// Which candidates a run of the given budget evaluates, ascending. With
/// budget >= |space| that is all of them; otherwise the smallest and largest
/// plus a seeded uniform sample of the rest. Depends only on its arguments.
inline std::vector<std::size_t> plan_trials(const SearchSpace& space, std::size_t budget, std::uint64_t seed) {
  const auto& c = space.candidates;
  if (c.empty()) throw Error(Errc::invalid_argument, "empty search space");
  if (budget == 0) throw Error(Errc::invalid_argument, "budget must be >= 1");
  if (budget >= c.size()) return c;
  if (budget == 1) return {c.front()};

  std::vector<std::size_t> middle(c.begin() + 1, c.end() - 1);
  const std::size_t take = budget - 2;
  for (std::size_t i = 0; i < take; ++i) {
    const auto bits = rng::draw(seed, rng::Stream::tune_plan, i);
    const std::size_t j = i + static_cast<std::size_t>(rng::bounded(bits, middle.size() - i));
    std::swap(middle[i], middle[j]);
  }
  std::vector<std::size_t> plan{c.front(), c.back()};
  plan.insert(plan.end(), middle.begin(), middle.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(plan.begin(), plan.end());
  return plan;
}

template <Scalar T>
TuneResult tune(const DenseMatrix<T>& x, const BsrMatrix<T>& w, const SearchSpace& space,
                const TuneOptions& opt = {}) {
  if (opt.repeats < 3 || opt.repeats % 2 == 0)
    throw Error(Errc::invalid_argument, "repeats must be odd and >= 3");
  for (auto t : space.candidates)
    if (t == 0 || w.k() % t != 0)
      throw Error(Errc::bad_lane_count, "candidate " + std::to_string(t) + " does not divide k");
  const auto plan = plan_trials(space, opt.budget, opt.plan_seed);
  const double tol = opt.tolerance.value_or(oracle_tolerance<T>);
  const auto oracle = OracleReference::build(x, w);
  const std::string env = opt.env.empty() ? default_env_tag(opt.executor.resolve()) : opt.env;

  TuneResult result;
  std::optional<std::size_t> best;
  for (const auto t : plan) {
    TuningRecord rec;
    rec.shape = {x.rows(), w.k(), w.n(), w.block_rows(), w.block_cols()};
    rec.sparsity = opt.sparsity;
    rec.seed = opt.data_seed;
    rec.schedule = Schedule::prwb(t);
    rec.repeats = opt.repeats;
    rec.env = env;
    rec.timestamp = iso8601_utc_now();
    rec.valid = oracle.compare(spmm_prwb(x, w, t, opt.executor)).within(tol);
    if (rec.valid) {
      const auto stats = measure([&] { return spmm_prwb(x, w, t, opt.executor); }, opt.warmup, opt.repeats);
      rec.median_ns = stats.median_ns;
      rec.min_ns = stats.min_ns;
      rec.mean_ns = stats.mean_ns;
      // Plan is ascending, so strict < keeps the smallest t on ties.
      if (!best || rec.median_ns < result.all_trials[*best].median_ns) best = result.all_trials.size();
    }
    result.all_trials.push_back(std::move(rec));
  }
  result.budget_used = result.all_trials.size();
  if (!best) throw Error(Errc::no_valid_candidate, "every tuning trial failed oracle verification");
  result.best = result.all_trials[*best];
  return result;
}

}  // namespace bsrspmm
