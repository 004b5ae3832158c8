#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bsrspmm/compare.hpp"
#include "bsrspmm/generate.hpp"
#include "bsrspmm/oracle.hpp"
#include "fixtures.hpp"

using namespace bsrspmm;
using bsrspmm::testing::brute_force_product;
using bsrspmm::testing::worked_example;
using bsrspmm::testing::worked_example_dense;

TEST_CASE("dense oracle on the worked example", "[oracle]") {
  const DenseMatrix<double> x(1, 4, {1, 1, 1, 1});
  const auto y = dense_matmul_bt(x, worked_example_dense());
  CHECK(std::vector<double>(y.data().begin(), y.data().end()) == std::vector<double>{3, 7, 11, 15});
  CHECK(bit_identical(spmm_reference(x, worked_example()), y));
}

TEST_CASE("zero W gives zero Y", "[oracle]") {
  const auto x = generate_dense<double>(3, 5, 1, ValueMode::uniform_real);
  const auto y = dense_matmul_bt(x, DenseMatrix<double>(4, 5));
  for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("unit row X picks out a column of W", "[oracle]") {
  const auto w = generate_dense<double>(6, 5, 2, ValueMode::uniform_real);
  for (std::size_t c = 0; c < 5; ++c) {
    DenseMatrix<double> e(1, 5);
    e(0, c) = 1.0;
    const auto y = dense_matmul_bt(e, w);
    for (std::size_t j = 0; j < 6; ++j) CHECK(y(0, j) == w(j, c));
  }
}

TEST_CASE("oracle agrees with a brute-force long double product", "[oracle][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = generate_dense<float>(1 + seed % 3, 40, seed, ValueMode::uniform_real);
    const auto w = generate_dense<float>(7, 40, seed + 50, ValueMode::uniform_real);
    const auto y = dense_matmul_bt_f64(x, w);
    const auto bf = brute_force_product(x, w);
    for (std::size_t e = 0; e < bf.size(); ++e) CHECK(std::abs(y.data()[e] - static_cast<double>(bf[e])) < 1e-13);
  }
}

TEST_CASE("spmm_reference is dense_matmul_bt of the expansion", "[oracle][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = generate_bsr<float>({16, 24, 4, 4, 0.5, seed});
    const auto x = generate_dense<float>(3, 24, seed + 9, ValueMode::uniform_real);
    CHECK(bit_identical(spmm_reference(x, w), dense_matmul_bt(x, to_dense(w))));
  }
}

TEST_CASE("scaling X by two scales Y by two exactly", "[oracle][property]") {
  const auto w = generate_dense<double>(9, 33, 4, ValueMode::uniform_real);
  auto x = generate_dense<double>(2, 33, 5, ValueMode::uniform_real);
  const auto y = dense_matmul_bt(x, w);
  for (auto& v : x.data()) v *= 2.0;
  const auto y2 = dense_matmul_bt(x, w);
  for (std::size_t e = 0; e < y.data().size(); ++e) CHECK(y2.data()[e] == 2.0 * y.data()[e]);
}

TEST_CASE("oracle shape mismatch", "[oracle]") {
  CHECK_THROWS_AS(dense_matmul_bt(DenseMatrix<double>(1, 3), DenseMatrix<double>(2, 4)), Error);
}

TEST_CASE("comparison measures", "[oracle][compare]") {
  const DenseMatrix<double> x(1, 2, {1.0, -1.0});
  const DenseMatrix<double> wd(1, 2, {1.0, 1.0 + 1e-9});
  const auto w = from_dense(wd, 1, 1);
  // ref = -1e-9, product magnitude ~2.
  DenseMatrix<double> y(1, 1, {0.0});
  const auto cmp = compare_to_oracle(y, x, w);
  CHECK(cmp.max_plain_error == Catch::Approx(1.0));
  CHECK(cmp.max_scaled_error == Catch::Approx(0.5e-9).epsilon(1e-6));
  CHECK_FALSE(cmp.bit_identical);
  CHECK(cmp.within(1e-8));
  CHECK_FALSE(cmp.within(1e-12));

  DenseMatrix<double> nan(1, 1, {std::nan("")});
  CHECK_FALSE(compare_to_oracle(nan, x, w).within(1.0));
}
