#pragma once

#include <cstdint>

namespace bsrspmm {

// Stateless counter-based generator: draw(seed, stream, counter) is a pure
// function, so any element of any generated array can be produced
// independently and identically on every platform.
namespace rng {

enum class Stream : std::uint64_t {
  block_shuffle = 1,
  block_values = 2,
  dense_values = 3,
  derived_seed = 4,
  tune_plan = 5,
};

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t draw(std::uint64_t seed, Stream stream, std::uint64_t counter) noexcept {
  std::uint64_t key = mix64(seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(stream) + 1));
  return mix64(key ^ (counter * 0xD1B54A32D192ED03ull + 0x9E3779B97F4A7C15ull));
}

/// Uniform integer in [0, range) by 128-bit multiply-shift.
constexpr std::uint64_t bounded(std::uint64_t bits, std::uint64_t range) noexcept {
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((u128(bits) * range) >> 64);
}

/// Child seed for sub-problem `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return draw(seed, Stream::derived_seed, index);
}

}  // namespace rng
}  // namespace bsrspmm
