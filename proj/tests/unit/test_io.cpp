#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bsrspmm/compare.hpp"
#include "bsrspmm/generate.hpp"
#include "bsrspmm/io.hpp"
#include "fixtures.hpp"

using namespace bsrspmm;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("bsrspmm_test_io_" + name);
}

Errc load_error(const std::vector<char>& bytes) {
  try {
    deserialize_bsr(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected load to fail");
  return Errc::io;
}

}  // namespace

TEST_CASE("worked example round-trips through a file", "[io]") {
  const auto path = temp_path("worked.bsr");
  const auto w = bsrspmm::testing::worked_example<double>();
  save(w, path);
  const auto back = load_bsr(path);
  REQUIRE(std::holds_alternative<BsrMatrix<double>>(back));
  CHECK(std::get<BsrMatrix<double>>(back) == w);
  fs::remove(path);
}

TEST_CASE("header layout is little-endian with the documented fields", "[io]") {
  const auto bytes = serialize(bsrspmm::testing::worked_example<float>());
  REQUIRE(bytes.size() == 4 + 1 + 5 * 8 + 3 * 8 + 2 * 8 + 8 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "BSR1");
  CHECK(bytes[4] == 0);  // f32
  CHECK(bytes[5] == 4);  // n, low byte first
  for (int i = 6; i < 13; ++i) CHECK(bytes[i] == 0);
  // first block_data value 1.0f = 0x3f800000
  const std::size_t data_at = 4 + 1 + 40 + 24 + 16;
  CHECK(static_cast<unsigned char>(bytes[data_at + 3]) == 0x3f);
  CHECK(static_cast<unsigned char>(bytes[data_at + 2]) == 0x80);
}

TEST_CASE("truncated file is a format error", "[io]") {
  auto bytes = serialize(bsrspmm::testing::worked_example<double>());
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
    std::vector<char> shorter(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK(load_error(shorter) == Errc::format);
  }
}

TEST_CASE("altered magic or version is a format error", "[io]") {
  auto bytes = serialize(bsrspmm::testing::worked_example<double>());
  auto bad = bytes;
  bad[0] = 'X';
  CHECK(load_error(bad) == Errc::format);
  bad = bytes;
  bad[3] = '2';
  CHECK(load_error(bad) == Errc::format);
  bad = bytes;
  bad[4] = 7;  // unknown kind
  CHECK(load_error(bad) == Errc::format);
  bad = bytes;
  bad.push_back(0);  // trailing garbage
  CHECK(load_error(bad) == Errc::format);
}

TEST_CASE("structurally invalid payload fails validation on load", "[io]") {
  auto bytes = serialize(bsrspmm::testing::worked_example<double>());
  // block_indices start after magic, kind, 5 header words and 3 pointers.
  const std::size_t idx_at = 4 + 1 + 40 + 24;
  bytes[idx_at] = 9;  // out-of-range block column
  CHECK(load_error(bytes) == Errc::bad_index);
}

TEST_CASE("huge declared counts do not allocate", "[io]") {
  auto bytes = serialize(BsrMatrix<double>::empty(2, 2, 1, 1));
  const std::size_t nnzb_at = 4 + 1 + 32;
  for (int i = 0; i < 8; ++i) bytes[nnzb_at + i] = static_cast<char>(0xff);
  CHECK(load_error(bytes) == Errc::format);
}

TEST_CASE("load_bsr_as enforces the scalar kind", "[io]") {
  const auto path = temp_path("kind.bsr");
  save(bsrspmm::testing::worked_example<float>(), path);
  CHECK_NOTHROW(load_bsr_as<float>(path));
  try {
    load_bsr_as<double>(path);
    FAIL("expected kind mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kind_mismatch);
  }
  fs::remove(path);
}

TEST_CASE("missing file is an I/O error", "[io]") {
  try {
    load_bsr(temp_path("does_not_exist.bsr"));
    FAIL("expected I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("dense files round-trip bit-exactly in both kinds", "[io][dense]") {
  const auto d32 = generate_dense<float>(3, 5, 11, ValueMode::uniform_real);
  const auto d64 = generate_dense<double>(2, 7, 12, ValueMode::uniform_real);
  auto b32 = deserialize_dense(serialize(d32));
  auto b64 = deserialize_dense(serialize(d64));
  CHECK(bit_identical(std::get<DenseMatrix<float>>(b32), d32));
  CHECK(bit_identical(std::get<DenseMatrix<double>>(b64), d64));
  auto bytes = serialize(d32);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DNS1");
  bytes.pop_back();
  CHECK_THROWS_AS(deserialize_dense(bytes), Error);
}

TEST_CASE("serialization is the identity on random matrices", "[io][property]") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t b = 1 + seed % 4;
    GenSpec spec{b * (1 + seed % 6), b * (2 + seed % 3), b, b, (seed % 5) / 4.0, seed, ValueMode::uniform_real};
    const auto w64 = generate_bsr<double>(spec);
    const auto w32 = generate_bsr<float>(spec);
    CHECK(std::get<BsrMatrix<double>>(deserialize_bsr(serialize(w64))) == w64);
    CHECK(std::get<BsrMatrix<float>>(deserialize_bsr(serialize(w32))) == w32);
    CHECK(serialize(std::get<BsrMatrix<float>>(deserialize_bsr(serialize(w32)))) == serialize(w32));
  }
}
