#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bsrspmm/error.hpp"

namespace bsrspmm {

// Serialized as a single byte in the matrix file formats.
enum class ScalarKind : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
concept Scalar = std::is_same_v<T, float> || std::is_same_v<T, double>;

template <Scalar T>
inline constexpr ScalarKind kind_of = std::is_same_v<T, float> ? ScalarKind::f32 : ScalarKind::f64;

inline std::string to_string(ScalarKind kind) { return kind == ScalarKind::f32 ? "f32" : "f64"; }

/// Row-major dense matrix. Used for the activations X (m x k) and for the
/// output Y (m x n).
template <Scalar T>
class DenseMatrix {
 public:
  using value_type = T;

  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    check_dims();
    data_.assign(rows * cols, T(0));
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims();
    if (data_.size() != rows * cols)
      throw Error(Errc::bad_shape, "dense data length " + std::to_string(data_.size()) +
                                       " != " + std::to_string(rows) + "x" + std::to_string(cols));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  static constexpr ScalarKind kind() noexcept { return kind_of<T>; }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  void check_dims() const {
    if (rows_ == 0 || cols_ == 0)
      throw Error(Errc::bad_shape, "dense matrix dimensions must be positive");
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<T> data_;
};

}  // namespace bsrspmm
