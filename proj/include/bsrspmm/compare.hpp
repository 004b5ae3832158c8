#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"
#include "bsrspmm/oracle.hpp"

namespace bsrspmm {

/// Element-wise tolerance against the double-precision oracle.
template <Scalar T>
inline constexpr double oracle_tolerance = std::is_same_v<T, float> ? 1e-5 : 1e-12;

/// Denominators below this are clamped, so exact zeros compare absolutely.
inline constexpr double relative_error_floor = 1e-30;

struct OracleComparison {
  /// max_ij |y - ref| / max(sum_c |X[i,c] W[j,c]|, floor)
  double max_scaled_error = 0.0;
  /// max_ij |y - ref| / max(|ref|, floor)
  double max_plain_error = 0.0;
  std::size_t worst_index = 0;
  bool bit_identical = true;  // y equals ref cast to the operand kind, bit for bit

  bool within(double tol) const noexcept { return max_scaled_error <= tol; }
};

template <Scalar T>
bool bit_identical(std::span<const T> a, std::span<const T> b) noexcept {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<Bits>(a[i]) != std::bit_cast<Bits>(b[i])) return false;
  return true;
}

template <Scalar T>
bool bit_identical(const DenseMatrix<T>& a, const DenseMatrix<T>& b) noexcept {
  return a.rows() == b.rows() && a.cols() == b.cols() && bit_identical(a.data(), b.data());
}

/// Double-precision oracle values for one (X, W) pair, plus the magnitude
/// sum sum_c |X[i,c] W[j,c]| of every element. Built once, reused to check
/// any number of schedule outputs.
struct OracleReference {
  DenseMatrix<double> values;
  DenseMatrix<double> magnitudes;

  template <Scalar T>
  static OracleReference build(const DenseMatrix<T>& x, const BsrMatrix<T>& w) {
    const auto wd = to_dense(w);
    OracleReference r{dense_matmul_bt_f64(x, wd), DenseMatrix<double>(x.rows(), w.n())};
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto xr = x.row(i);
      for (std::size_t j = 0; j < w.n(); ++j) {
        const auto wr = wd.row(j);
        double magnitude = 0.0;
        for (std::size_t c = 0; c < xr.size(); ++c)
          magnitude += std::abs(static_cast<double>(xr[c]) * static_cast<double>(wr[c]));
        r.magnitudes(i, j) = magnitude;
      }
    }
    return r;
  }

  /// The primary error measure divides by the magnitude sum of the products
  /// forming each element. That is the conditioning of a dot product: two
  /// summation orders can differ by a few ulps of that sum, while |ref| itself
  /// can be arbitrarily small through cancellation.
  template <Scalar T>
  OracleComparison compare(const DenseMatrix<T>& y) const {
    if (y.rows() != values.rows() || y.cols() != values.cols())
      throw Error(Errc::shape_mismatch, "output shape does not match the oracle");
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    OracleComparison out;
    const auto ref = values.data();
    const auto mag = magnitudes.data();
    const auto got = y.data();
    for (std::size_t e = 0; e < ref.size(); ++e) {
      const double diff = std::abs(static_cast<double>(got[e]) - ref[e]);
      double scaled = diff / std::max(mag[e], relative_error_floor);
      double plain = diff / std::max(std::abs(ref[e]), relative_error_floor);
      if (std::isnan(scaled)) scaled = INFINITY;
      if (std::isnan(plain)) plain = INFINITY;
      if (scaled > out.max_scaled_error) {
        out.max_scaled_error = scaled;
        out.worst_index = e;
      }
      out.max_plain_error = std::max(out.max_plain_error, plain);
      if (std::bit_cast<Bits>(static_cast<T>(ref[e])) != std::bit_cast<Bits>(got[e])) out.bit_identical = false;
    }
    return out;
  }
};

template <Scalar T>
OracleComparison compare_to_oracle(const DenseMatrix<T>& y, const DenseMatrix<T>& x, const BsrMatrix<T>& w) {
  if (y.rows() != x.rows() || y.cols() != w.n())
    throw Error(Errc::shape_mismatch, "output shape does not match operands");
  return OracleReference::build(x, w).compare(y);
}

template <Scalar T>
bool matches_oracle(const DenseMatrix<T>& y, const DenseMatrix<T>& x, const BsrMatrix<T>& w,
                    double tol = oracle_tolerance<T>) {
  return compare_to_oracle(y, x, w).within(tol);
}

}  // namespace bsrspmm
