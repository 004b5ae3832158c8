#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <span>
#include <vector>

#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"

namespace bsrspmm {

/// Pairwise halving reduction of lane partials into lane 0.
///
/// The input is conceptually zero-padded to the next power of two P; then for
/// s = P/2, P/4, ..., 1 every lane l < s adds lane l + s. `partials` is used
/// as scratch and must have room for P values; entries [L, P) are overwritten.
template <Scalar T>
T tree_reduce_inplace(std::span<T> partials, std::size_t lanes) noexcept {
  const std::size_t padded = std::bit_ceil(lanes);
  for (std::size_t l = lanes; l < padded; ++l) partials[l] = T(0);
  for (std::size_t s = padded / 2; s >= 1; s /= 2)
    for (std::size_t l = 0; l < s; ++l) partials[l] += partials[l + s];
  return partials[0];
}

/// Non-destructive form. Precondition: partials is non-empty.
template <Scalar T>
T tree_reduce(std::span<const T> partials) {
  if (partials.empty()) throw Error(Errc::invalid_argument, "tree_reduce needs at least one partial");
  constexpr std::size_t stack_lanes = 64;
  const std::size_t padded = std::bit_ceil(partials.size());
  if (padded <= stack_lanes) {
    T buf[stack_lanes];
    std::copy(partials.begin(), partials.end(), buf);
    return tree_reduce_inplace(std::span<T>(buf, padded), partials.size());
  }
  std::vector<T> buf(partials.begin(), partials.end());
  buf.resize(padded);
  return tree_reduce_inplace(std::span<T>(buf), partials.size());
}

template <Scalar T>
T tree_reduce(std::span<T> partials) {
  return tree_reduce(std::span<const T>(partials));
}

}  // namespace bsrspmm
