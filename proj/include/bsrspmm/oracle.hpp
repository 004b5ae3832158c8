#pragma once

#include <cstddef>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"

namespace bsrspmm {

/// Y = X * W^T with dense W (n x k). Each Y_ij sums X[i,c] * W[j,c] for c
/// ascending in one double accumulator, whatever the operand kind.
template <Scalar T>
DenseMatrix<double> dense_matmul_bt_f64(const DenseMatrix<T>& x, const DenseMatrix<T>& w) {
  if (x.cols() != w.cols())
    throw Error(Errc::shape_mismatch, "inner dimensions differ: " + std::to_string(x.cols()) + " vs " +
                                          std::to_string(w.cols()));
  const std::size_t m = x.rows(), n = w.rows(), k = x.cols();
  DenseMatrix<double> y(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto xr = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto wr = w.row(j);
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += static_cast<double>(xr[c]) * static_cast<double>(wr[c]);
      y(i, j) = acc;
    }
  }
  return y;
}

/// Oracle result cast back to the operand kind.
template <Scalar T>
DenseMatrix<T> dense_matmul_bt(const DenseMatrix<T>& x, const DenseMatrix<T>& w) {
  auto wide = dense_matmul_bt_f64(x, w);
  if constexpr (std::is_same_v<T, double>) {
    return wide;
  } else {
    DenseMatrix<T> y(wide.rows(), wide.cols());
    auto src = wide.data();
    auto dst = y.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
    return y;
  }
}

template <Scalar T>
DenseMatrix<double> spmm_reference_f64(const DenseMatrix<T>& x, const BsrMatrix<T>& w) {
  return dense_matmul_bt_f64(x, to_dense(w));
}

template <Scalar T>
DenseMatrix<T> spmm_reference(const DenseMatrix<T>& x, const BsrMatrix<T>& w) {
  return dense_matmul_bt(x, to_dense(w));
}

}  // namespace bsrspmm
