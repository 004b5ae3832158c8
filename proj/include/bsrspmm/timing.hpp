#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bsrspmm/error.hpp"

namespace bsrspmm {

struct TimingStats {
  std::int64_t median_ns = 0;
  std::int64_t min_ns = 0;
  std::int64_t mean_ns = 0;
  std::size_t repeats = 0;
};

template <typename T>
inline void do_not_optimize(const T& value) {
#if defined(__GNUC__) || defined(__clang__)
  asm volatile("" : : "g"(&value) : "memory");
#else
  (void)value;
#endif
}

inline TimingStats summarize(std::vector<std::int64_t> samples) {
  if (samples.empty()) throw Error(Errc::invalid_argument, "no timing samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  TimingStats s;
  s.repeats = n;
  s.min_ns = samples.front();
  s.median_ns = n % 2 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2;
  s.mean_ns = std::accumulate(samples.begin(), samples.end(), std::int64_t{0}) / static_cast<std::int64_t>(n);
  return s;
}

/// Runs fn() `warmup` times untimed, then `repeats` timed runs.
template <typename Fn>
TimingStats measure(Fn&& fn, std::size_t warmup, std::size_t repeats) {
  if (repeats == 0) throw Error(Errc::invalid_argument, "repeats must be >= 1");
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < warmup; ++i) do_not_optimize(fn());
  std::vector<std::int64_t> samples;
  samples.reserve(repeats);
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto t0 = clock::now();
    auto result = fn();
    const auto t1 = clock::now();
    do_not_optimize(result);
    samples.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  }
  return summarize(std::move(samples));
}

}  // namespace bsrspmm
