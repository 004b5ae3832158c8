#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"

namespace bsrspmm {

/// Problem dimensions for Y (m x n) = X (m x k) * W^T, with W stored as an
/// n x k block-sparse matrix of b_r x b_c blocks.
struct ProblemShape {
  std::size_t m = 1;
  std::size_t k = 1;
  std::size_t n = 1;
  std::size_t block_rows = 1;
  std::size_t block_cols = 1;

  friend bool operator==(const ProblemShape&, const ProblemShape&) = default;
};

inline std::optional<Error> validate(const ProblemShape& s) {
  if (s.m == 0 || s.k == 0 || s.n == 0 || s.block_rows == 0 || s.block_cols == 0)
    return Error(Errc::bad_shape, "problem dimensions must be positive");
  if (s.n % s.block_rows != 0)
    return Error(Errc::bad_shape, "block_rows does not divide n");
  if (s.k % s.block_cols != 0)
    return Error(Errc::bad_shape, "block_cols does not divide k");
  return std::nullopt;
}

/// The raw BSR arrays, unchecked. `block_data` is logically shaped
/// [nnzb, block_rows, block_cols] with each block row-major.
template <Scalar T>
struct BsrParts {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t block_rows = 1;
  std::size_t block_cols = 1;
  std::vector<T> block_data;
  std::vector<std::uint64_t> block_indices;
  std::vector<std::uint64_t> index_pointer;

  friend bool operator==(const BsrParts&, const BsrParts&) = default;
};

/// Checks every structural invariant of the BSR layout. Returns the first
/// violation found, in the order: shape, pointer, index, data length.
template <Scalar T>
std::optional<Error> validate(const BsrParts<T>& w) {
  if (w.n == 0 || w.k == 0 || w.block_rows == 0 || w.block_cols == 0)
    return Error(Errc::bad_shape, "dimensions must be positive");
  if (w.n % w.block_rows != 0)
    return Error(Errc::bad_shape, "block_rows " + std::to_string(w.block_rows) +
                                      " does not divide n " + std::to_string(w.n));
  if (w.k % w.block_cols != 0)
    return Error(Errc::bad_shape, "block_cols " + std::to_string(w.block_cols) +
                                      " does not divide k " + std::to_string(w.k));

  const std::size_t brows = w.n / w.block_rows;
  const std::size_t bcols = w.k / w.block_cols;
  const auto& ptr = w.index_pointer;
  if (ptr.size() != brows + 1)
    return Error(Errc::bad_pointer, "index_pointer length " + std::to_string(ptr.size()) +
                                        " != block row count + 1 (" + std::to_string(brows + 1) + ")");
  if (ptr.front() != 0) return Error(Errc::bad_pointer, "index_pointer[0] != 0");
  for (std::size_t r = 0; r < brows; ++r)
    if (ptr[r + 1] < ptr[r])
      return Error(Errc::bad_pointer, "index_pointer decreases at block row " + std::to_string(r));
  if (ptr.back() != w.block_indices.size())
    return Error(Errc::bad_pointer, "index_pointer end " + std::to_string(ptr.back()) +
                                        " != nnzb " + std::to_string(w.block_indices.size()));

  for (std::size_t r = 0; r < brows; ++r) {
    for (std::uint64_t p = ptr[r]; p < ptr[r + 1]; ++p) {
      if (w.block_indices[p] >= bcols)
        return Error(Errc::bad_index, "block column " + std::to_string(w.block_indices[p]) +
                                          " out of range in block row " + std::to_string(r));
      if (p > ptr[r] && w.block_indices[p] <= w.block_indices[p - 1])
        return Error(Errc::bad_index,
                     "block columns not strictly increasing in block row " + std::to_string(r));
    }
  }

  const std::size_t block_size = w.block_rows * w.block_cols;
  if (w.block_data.size() != w.block_indices.size() * block_size)
    return Error(Errc::bad_shape, "block_data length " + std::to_string(w.block_data.size()) +
                                      " != nnzb * block size");
  return std::nullopt;
}

/// Transposed block-sparse weights W_B (n x k) in BSR layout. Construction
/// validates; an instance always satisfies the BSR invariants and is
/// immutable afterwards.
template <Scalar T>
class BsrMatrix {
 public:
  using value_type = T;

  explicit BsrMatrix(BsrParts<T> parts) : parts_(std::move(parts)) {
    if (auto err = validate(parts_)) throw *err;
  }

  /// A matrix with no stored blocks.
  static BsrMatrix empty(std::size_t n, std::size_t k, std::size_t block_rows, std::size_t block_cols) {
    BsrParts<T> p{n, k, block_rows, block_cols, {}, {}, {}};
    p.index_pointer.assign(block_rows == 0 ? 1 : n / block_rows + 1, 0);
    return BsrMatrix(std::move(p));
  }

  std::size_t n() const noexcept { return parts_.n; }
  std::size_t k() const noexcept { return parts_.k; }
  std::size_t block_rows() const noexcept { return parts_.block_rows; }
  std::size_t block_cols() const noexcept { return parts_.block_cols; }
  std::size_t block_size() const noexcept { return parts_.block_rows * parts_.block_cols; }
  std::size_t num_block_rows() const noexcept { return parts_.n / parts_.block_rows; }
  std::size_t num_block_cols() const noexcept { return parts_.k / parts_.block_cols; }
  std::size_t nnzb() const noexcept { return parts_.block_indices.size(); }
  static constexpr ScalarKind kind() noexcept { return kind_of<T>; }

  std::span<const T> block_data() const noexcept { return parts_.block_data; }
  std::span<const std::uint64_t> block_indices() const noexcept { return parts_.block_indices; }
  std::span<const std::uint64_t> index_pointer() const noexcept { return parts_.index_pointer; }

  /// Stored block `p` as a row-major b_r x b_c span.
  std::span<const T> block(std::size_t p) const noexcept {
    return {parts_.block_data.data() + p * block_size(), block_size()};
  }

  /// Stored-block range [first, last) of block row `r`.
  std::pair<std::size_t, std::size_t> row_range(std::size_t r) const noexcept {
    return {static_cast<std::size_t>(parts_.index_pointer[r]),
            static_cast<std::size_t>(parts_.index_pointer[r + 1])};
  }

  const BsrParts<T>& parts() const noexcept { return parts_; }

  friend bool operator==(const BsrMatrix&, const BsrMatrix&) = default;

 private:
  BsrParts<T> parts_;
};

/// Converts a dense n x k matrix to BSR. A block is stored iff one of its
/// elements has magnitude strictly above `drop_tol`.
template <Scalar T>
BsrMatrix<T> from_dense(const DenseMatrix<T>& d, std::size_t block_rows, std::size_t block_cols,
                        T drop_tol = T(0)) {
  if (block_rows == 0 || block_cols == 0 || d.rows() % block_rows != 0 || d.cols() % block_cols != 0)
    throw Error(Errc::bad_shape, "block dims must divide the dense matrix dims");
  if (!(drop_tol >= T(0))) throw Error(Errc::invalid_argument, "drop_tol must be >= 0");

  BsrParts<T> p{d.rows(), d.cols(), block_rows, block_cols, {}, {}, {}};
  const std::size_t brows = d.rows() / block_rows;
  const std::size_t bcols = d.cols() / block_cols;
  p.index_pointer.reserve(brows + 1);
  p.index_pointer.push_back(0);

  for (std::size_t br = 0; br < brows; ++br) {
    for (std::size_t bc = 0; bc < bcols; ++bc) {
      bool keep = false;
      for (std::size_t i = 0; i < block_rows && !keep; ++i)
        for (std::size_t j = 0; j < block_cols && !keep; ++j)
          keep = std::abs(d(br * block_rows + i, bc * block_cols + j)) > drop_tol;
      if (!keep) continue;
      p.block_indices.push_back(bc);
      for (std::size_t i = 0; i < block_rows; ++i)
        for (std::size_t j = 0; j < block_cols; ++j)
          p.block_data.push_back(d(br * block_rows + i, bc * block_cols + j));
    }
    p.index_pointer.push_back(p.block_indices.size());
  }
  return BsrMatrix<T>(std::move(p));
}

template <Scalar T>
DenseMatrix<T> to_dense(const BsrMatrix<T>& w) {
  DenseMatrix<T> d(w.n(), w.k());
  const std::size_t br = w.block_rows(), bc = w.block_cols();
  for (std::size_t r = 0; r < w.num_block_rows(); ++r) {
    auto [first, last] = w.row_range(r);
    for (std::size_t p = first; p < last; ++p) {
      auto blk = w.block(p);
      const std::size_t col0 = w.block_indices()[p] * bc;
      for (std::size_t i = 0; i < br; ++i)
        std::copy_n(blk.data() + i * bc, bc, d.row(r * br + i).data() + col0);
    }
  }
  return d;
}

using AnyDense = std::variant<DenseMatrix<float>, DenseMatrix<double>>;
using AnyBsr = std::variant<BsrMatrix<float>, BsrMatrix<double>>;

inline ScalarKind kind_of_any(const AnyDense& d) {
  return d.index() == 0 ? ScalarKind::f32 : ScalarKind::f64;
}
inline ScalarKind kind_of_any(const AnyBsr& w) {
  return w.index() == 0 ? ScalarKind::f32 : ScalarKind::f64;
}

}  // namespace bsrspmm
