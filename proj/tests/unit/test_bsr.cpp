#include <catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/compare.hpp"
#include "bsrspmm/generate.hpp"
#include "fixtures.hpp"

using namespace bsrspmm;
using bsrspmm::testing::worked_example;
using bsrspmm::testing::worked_example_dense;
using bsrspmm::testing::worked_example_parts;

namespace {

template <Scalar T>
Errc error_code(const BsrParts<T>& p) {
  auto err = validate(p);
  REQUIRE(err.has_value());
  return err->code();
}

}  // namespace

TEST_CASE("validate accepts an empty matrix", "[bsr][validate]") {
  BsrParts<double> p{2, 2, 2, 2, {}, {}, {0, 0}};
  CHECK_FALSE(validate(p).has_value());
  CHECK_NOTHROW(BsrMatrix<double>(p));
}

TEST_CASE("validate rejects a decreasing index_pointer", "[bsr][validate]") {
  BsrParts<double> p{4, 4, 2, 2, std::vector<double>(4, 1.0), {0}, {0, 2, 1}};
  CHECK(error_code(p) == Errc::bad_pointer);
}

TEST_CASE("validate rejects non-increasing block columns within a row", "[bsr][validate]") {
  BsrParts<double> p{2, 4, 2, 2, std::vector<double>(8, 1.0), {1, 0}, {0, 2}};
  CHECK(error_code(p) == Errc::bad_index);
  p.block_indices = {1, 1};
  CHECK(error_code(p) == Errc::bad_index);
}

TEST_CASE("validate classifies each broken invariant", "[bsr][validate]") {
  auto p = worked_example_parts();
  CHECK_FALSE(validate(p).has_value());

  SECTION("block column out of range") {
    p.block_indices = {2, 0};
    CHECK(error_code(p) == Errc::bad_index);
  }
  SECTION("pointer must start at zero") {
    p.index_pointer = {1, 1, 2};
    CHECK(error_code(p) == Errc::bad_pointer);
  }
  SECTION("pointer must end at nnzb") {
    p.index_pointer = {0, 1, 1};
    CHECK(error_code(p) == Errc::bad_pointer);
  }
  SECTION("pointer length") {
    p.index_pointer = {0, 2};
    CHECK(error_code(p) == Errc::bad_pointer);
  }
  SECTION("block dims must divide") {
    p.block_rows = 3;
    CHECK(error_code(p) == Errc::bad_shape);
  }
  SECTION("block data length") {
    p.block_data.pop_back();
    CHECK(error_code(p) == Errc::bad_shape);
  }
  SECTION("constructor throws the same error") {
    p.block_indices = {1, 1};
    p.index_pointer = {0, 2, 2};
    try {
      BsrMatrix<double> w(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::bad_index);
    }
  }
}

TEST_CASE("worked example expands to the hand-built dense array", "[bsr][to_dense]") {
  CHECK(bit_identical(to_dense(worked_example()), worked_example_dense()));
}

TEST_CASE("to_dense of an empty matrix is all zeros", "[bsr][to_dense]") {
  auto d = to_dense(BsrMatrix<float>::empty(4, 6, 2, 3));
  CHECK(d.rows() == 4);
  CHECK(d.cols() == 6);
  for (float v : d.data()) CHECK(v == 0.0f);
}

TEST_CASE("from_dense of the 4x4 identity stores the two diagonal blocks", "[bsr][from_dense]") {
  DenseMatrix<double> eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
  auto w = from_dense(eye, 2, 2);
  CHECK(w.nnzb() == 2);
  CHECK(std::vector<std::uint64_t>(w.block_indices().begin(), w.block_indices().end()) ==
        std::vector<std::uint64_t>{0, 1});
  CHECK(std::vector<std::uint64_t>(w.index_pointer().begin(), w.index_pointer().end()) ==
        std::vector<std::uint64_t>{0, 1, 2});
}

TEST_CASE("from_dense of a zero matrix stores nothing", "[bsr][from_dense]") {
  auto w = from_dense(DenseMatrix<double>(4, 4), 2, 2);
  CHECK(w.nnzb() == 0);
  CHECK(std::vector<std::uint64_t>(w.index_pointer().begin(), w.index_pointer().end()) ==
        std::vector<std::uint64_t>{0, 0, 0});
}

TEST_CASE("from_dense reproduces the worked example exactly", "[bsr][from_dense]") {
  auto w = from_dense(worked_example_dense(), 2, 2);
  CHECK(w == worked_example());
  CHECK(bit_identical(to_dense(w), worked_example_dense()));
}

TEST_CASE("from_dense drop tolerance and errors", "[bsr][from_dense]") {
  DenseMatrix<double> d(2, 4, {0.1, 0, 0, 3, 0, -0.05, 0, 0});
  CHECK(from_dense(d, 2, 2, 0.0).nnzb() == 2);
  CHECK(from_dense(d, 2, 2, 0.1).nnzb() == 1);  // strictly greater keeps a block
  CHECK(from_dense(d, 2, 2, 5.0).nnzb() == 0);
  CHECK_THROWS_AS(from_dense(d, 3, 2), Error);
  CHECK_THROWS_AS(from_dense(d, 2, 2, -1.0), Error);
}

TEST_CASE("dense round trip, canonical form and pointer arithmetic on random inputs", "[bsr][property]") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t b = std::size_t{1} << (seed % 4);
    const std::size_t n = b * (1 + seed % 5), k = b * (1 + (seed / 5) % 4);
    // Sparsify by zeroing whole blocks of a dense random matrix.
    auto d = generate_dense<double>(n, k, seed, ValueMode::uniform_real);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < k; ++c)
        if (((i / b) * 7 + (c / b) * 3 + seed) % 3 == 0) d(i, c) = 0.0;

    const auto w = from_dense(d, b, b);
    REQUIRE_FALSE(validate(w.parts()).has_value());
    CHECK(bit_identical(to_dense(w), d));

    std::size_t total = 0;
    for (std::size_t r = 0; r < w.num_block_rows(); ++r) {
      auto [first, last] = w.row_range(r);
      total += last - first;
      for (auto p = first + 1; p < last; ++p) CHECK(w.block_indices()[p - 1] < w.block_indices()[p]);
    }
    CHECK(total == w.nnzb());
  }
}

TEST_CASE("explicit zero blocks are legal", "[bsr]") {
  BsrParts<double> p{2, 4, 2, 2, {0, 0, 0, 0, 1, 2, 3, 4}, {0, 1}, {0, 2}};
  BsrMatrix<double> w(p);
  CHECK(w.nnzb() == 2);
  CHECK(to_dense(w)(0, 0) == 0.0);
}

TEST_CASE("dense matrix rejects degenerate shapes", "[dense]") {
  CHECK_THROWS_AS(DenseMatrix<float>(0, 3), Error);
  CHECK_THROWS_AS(DenseMatrix<float>(2, 2, {1, 2, 3}), Error);
}
