#pragma once

// Shared test fixtures. The worked example is written out by hand here, not
// derived through the library.

#include <cstdint>
#include <vector>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/dense.hpp"

namespace bsrspmm::testing {

// n = k = 4, 2x2 blocks: block row 0 holds block column 1, block row 1 holds
// block column 0.
template <Scalar T = double>
BsrParts<T> worked_example_parts() {
  return BsrParts<T>{4, 4, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8}, {1, 0}, {0, 1, 2}};
}

template <Scalar T = double>
BsrMatrix<T> worked_example() {
  return BsrMatrix<T>(worked_example_parts<T>());
}

template <Scalar T = double>
DenseMatrix<T> worked_example_dense() {
  return DenseMatrix<T>(4, 4, {0, 0, 1, 2,  //
                               0, 0, 3, 4,  //
                               5, 6, 0, 0,  //
                               7, 8, 0, 0});
}

// Brute-force Y = X * W^T straight from the definition, in the operand
// kind's own arithmetic with c ascending.
template <Scalar T>
std::vector<long double> brute_force_product(const DenseMatrix<T>& x, const DenseMatrix<T>& w) {
  std::vector<long double> y(x.rows() * w.rows(), 0.0L);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < w.rows(); ++j)
      for (std::size_t c = 0; c < x.cols(); ++c)
        y[i * w.rows() + j] += static_cast<long double>(x(i, c)) * static_cast<long double>(w(j, c));
  return y;
}

}  // namespace bsrspmm::testing
