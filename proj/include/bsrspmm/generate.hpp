#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"
#include "bsrspmm/rng.hpp"

namespace bsrspmm {

enum class ValueMode {
  uniform_real,  // open interval (-1, 1)
  small_int,     // integers -4..4, exact in f32 and f64
};

inline std::string_view to_string(ValueMode m) {
  return m == ValueMode::uniform_real ? "uniform_real" : "small_int";
}

inline ValueMode parse_value_mode(std::string_view s) {
  if (s == "uniform_real" || s == "uniform") return ValueMode::uniform_real;
  if (s == "small_int" || s == "int") return ValueMode::small_int;
  throw Error(Errc::invalid_argument, "unknown value mode '" + std::string(s) + "'");
}

struct GenSpec {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t block_rows = 1;
  std::size_t block_cols = 1;
  double sparsity = 0.0;  // fraction of zero blocks
  std::uint64_t seed = 0;
  ValueMode value_mode = ValueMode::uniform_real;
};

/// Number of stored blocks for a given slot count and block sparsity.
inline std::size_t stored_block_count(double sparsity, std::size_t slots) {
  return static_cast<std::size_t>(std::round((1.0 - sparsity) * static_cast<double>(slots)));
}

template <Scalar T>
T value_from_bits(std::uint64_t bits, ValueMode mode) noexcept {
  if (mode == ValueMode::small_int) {
    const auto v = static_cast<std::int64_t>(rng::bounded(bits, 9)) - 4;
    return static_cast<T>(v);
  }
  // (2u + 1 - 2^d) / 2^d for a d-bit u: exactly representable, never +-1.
  constexpr int digits = std::numeric_limits<T>::digits;
  const auto u = static_cast<std::int64_t>(bits >> (64 - digits));
  const std::int64_t num = 2 * u + 1 - (std::int64_t(1) << digits);
  return std::ldexp(static_cast<T>(num), -digits);
}

template <Scalar T>
BsrMatrix<T> generate_bsr(const GenSpec& spec) {
  if (!(spec.sparsity >= 0.0 && spec.sparsity <= 1.0))
    throw Error(Errc::invalid_argument, "sparsity must lie in [0, 1]");
  if (auto err = validate(ProblemShape{1, spec.k, spec.n, spec.block_rows, spec.block_cols})) throw *err;

  const std::size_t brows = spec.n / spec.block_rows;
  const std::size_t bcols = spec.k / spec.block_cols;
  const std::size_t slots = brows * bcols;
  const std::size_t nnzb = std::min(stored_block_count(spec.sparsity, slots), slots);

  // Partial Fisher-Yates: the first nnzb entries become a uniform sample.
  std::vector<std::uint64_t> order(slots);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  for (std::size_t i = 0; i < nnzb; ++i) {
    const auto bits = rng::draw(spec.seed, rng::Stream::block_shuffle, i);
    const std::size_t j = i + static_cast<std::size_t>(rng::bounded(bits, slots - i));
    std::swap(order[i], order[j]);
  }
  order.resize(nnzb);
  std::sort(order.begin(), order.end());

  BsrParts<T> p{spec.n, spec.k, spec.block_rows, spec.block_cols, {}, {}, {}};
  const std::size_t bsize = spec.block_rows * spec.block_cols;
  p.block_indices.reserve(nnzb);
  p.block_data.reserve(nnzb * bsize);
  p.index_pointer.assign(brows + 1, 0);
  for (const auto slot : order) {
    const std::size_t r = slot / bcols;
    p.block_indices.push_back(slot % bcols);
    ++p.index_pointer[r + 1];
    for (std::size_t e = 0; e < bsize; ++e)
      p.block_data.push_back(value_from_bits<T>(
          rng::draw(spec.seed, rng::Stream::block_values, slot * bsize + e), spec.value_mode));
  }
  std::partial_sum(p.index_pointer.begin(), p.index_pointer.end(), p.index_pointer.begin());
  return BsrMatrix<T>(std::move(p));
}

template <Scalar T>
DenseMatrix<T> generate_dense(std::size_t rows, std::size_t cols, std::uint64_t seed, ValueMode mode) {
  DenseMatrix<T> d(rows, cols);
  auto data = d.data();
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = value_from_bits<T>(rng::draw(seed, rng::Stream::dense_values, i), mode);
  return d;
}

}  // namespace bsrspmm
