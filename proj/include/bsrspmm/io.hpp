#pragma once

// Little-endian binary formats.
//
//   BSR file:   "BSR1" | u8 kind | u64 n, k, b_r, b_c, nnzb
//               | u64 index_pointer[n/b_r + 1] | u64 block_indices[nnzb]
//               | scalar block_data[nnzb * b_r * b_c]
//   Dense file: "DNS1" | u8 kind | u64 rows, cols | scalar data[rows * cols]
//
// kind: 0 = f32, 1 = f64.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"

namespace bsrspmm {

namespace detail {

inline constexpr std::string_view bsr_magic = "BSR1";
inline constexpr std::string_view dense_magic = "DNS1";

class ByteWriter {
 public:
  void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  template <Scalar T>
  void put_scalar(T v) {
    if constexpr (sizeof(T) == 4)
      put_u32(std::bit_cast<std::uint32_t>(v));
    else
      put_u64(std::bit_cast<std::uint64_t>(v));
  }

  const std::vector<char>& bytes() const noexcept { return buf_; }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> buf) : buf_(std::move(buf)) {}

  std::size_t remaining() const noexcept { return buf_.size() - pos_; }

  void expect_magic(std::string_view magic) {
    need(magic.size(), "magic");
    if (std::memcmp(buf_.data() + pos_, magic.data(), magic.size()) != 0) {
      // Same family, different version digit.
      if (std::memcmp(buf_.data() + pos_, magic.data(), magic.size() - 1) == 0)
        throw Error(Errc::format, "unsupported format version '" +
                                      std::string(buf_.data() + pos_, magic.size()) + "'");
      throw Error(Errc::format, "bad magic, expected '" + std::string(magic) + "'");
    }
    pos_ += magic.size();
  }

  std::uint8_t get_u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t get_u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t get_u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  template <Scalar T>
  T get_scalar(const char* what) {
    if constexpr (sizeof(T) == 4)
      return std::bit_cast<T>(get_u32(what));
    else
      return std::bit_cast<T>(get_u64(what));
  }

  // Guards allocations against corrupt counts before reading an array.
  void need_array(std::uint64_t count, std::size_t elem, const char* what) const {
    if (elem != 0 && count > remaining() / elem)
      throw Error(Errc::format, std::string("truncated file while reading ") + what);
  }

  void expect_end() const {
    if (remaining() != 0)
      throw Error(Errc::format, std::to_string(remaining()) + " trailing bytes after payload");
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw Error(Errc::format, std::string("truncated file while reading ") + what);
  }

  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

inline void write_file(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for reading");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "read failed for '" + path.string() + "'");
  return bytes;
}

inline ScalarKind read_kind(ByteReader& r) {
  const auto k = r.get_u8("scalar kind");
  if (k > 1) throw Error(Errc::format, "unknown scalar kind byte " + std::to_string(k));
  return static_cast<ScalarKind>(k);
}

inline std::size_t checked_size(std::uint64_t v, const char* what) {
  if (v > std::numeric_limits<std::size_t>::max()) throw Error(Errc::format, std::string(what) + " too large");
  return static_cast<std::size_t>(v);
}

template <Scalar T>
BsrMatrix<T> read_bsr_body(ByteReader& r) {
  BsrParts<T> p;
  p.n = checked_size(r.get_u64("n"), "n");
  p.k = checked_size(r.get_u64("k"), "k");
  p.block_rows = checked_size(r.get_u64("b_r"), "b_r");
  p.block_cols = checked_size(r.get_u64("b_c"), "b_c");
  const std::uint64_t nnzb = r.get_u64("nnzb");
  if (p.block_rows == 0 || p.block_cols == 0 || p.n % p.block_rows != 0 || p.k % p.block_cols != 0)
    throw Error(Errc::bad_shape, "header block dims do not divide matrix dims");

  const std::uint64_t ptr_len = p.n / p.block_rows + 1;
  r.need_array(ptr_len, 8, "index_pointer");
  p.index_pointer.resize(ptr_len);
  for (auto& v : p.index_pointer) v = r.get_u64("index_pointer");

  r.need_array(nnzb, 8, "block_indices");
  p.block_indices.resize(nnzb);
  for (auto& v : p.block_indices) v = r.get_u64("block_indices");

  const std::uint64_t block_size = std::uint64_t(p.block_rows) * p.block_cols;
  if (block_size != 0 && nnzb > std::numeric_limits<std::uint64_t>::max() / block_size)
    throw Error(Errc::format, "block_data size overflows");
  r.need_array(nnzb * block_size, sizeof(T), "block_data");
  p.block_data.resize(nnzb * block_size);
  for (auto& v : p.block_data) v = r.get_scalar<T>("block_data");
  r.expect_end();
  return BsrMatrix<T>(std::move(p));
}

template <Scalar T>
DenseMatrix<T> read_dense_body(ByteReader& r) {
  const std::size_t rows = checked_size(r.get_u64("rows"), "rows");
  const std::size_t cols = checked_size(r.get_u64("cols"), "cols");
  if (cols != 0 && rows > std::numeric_limits<std::size_t>::max() / cols)
    throw Error(Errc::format, "dense size overflows");
  r.need_array(std::uint64_t(rows) * cols, sizeof(T), "dense data");
  std::vector<T> data(rows * cols);
  for (auto& v : data) v = r.get_scalar<T>("dense data");
  r.expect_end();
  return DenseMatrix<T>(rows, cols, std::move(data));
}

}  // namespace detail

template <Scalar T>
std::vector<char> serialize(const BsrMatrix<T>& w) {
  detail::ByteWriter out;
  out.put_bytes(detail::bsr_magic);
  out.put_u8(static_cast<std::uint8_t>(kind_of<T>));
  out.put_u64(w.n());
  out.put_u64(w.k());
  out.put_u64(w.block_rows());
  out.put_u64(w.block_cols());
  out.put_u64(w.nnzb());
  for (auto v : w.index_pointer()) out.put_u64(v);
  for (auto v : w.block_indices()) out.put_u64(v);
  for (auto v : w.block_data()) out.put_scalar(v);
  return out.bytes();
}

template <Scalar T>
std::vector<char> serialize(const DenseMatrix<T>& d) {
  detail::ByteWriter out;
  out.put_bytes(detail::dense_magic);
  out.put_u8(static_cast<std::uint8_t>(kind_of<T>));
  out.put_u64(d.rows());
  out.put_u64(d.cols());
  for (auto v : d.data()) out.put_scalar(v);
  return out.bytes();
}

inline AnyBsr deserialize_bsr(std::vector<char> bytes) {
  detail::ByteReader r(std::move(bytes));
  r.expect_magic(detail::bsr_magic);
  if (detail::read_kind(r) == ScalarKind::f32) return detail::read_bsr_body<float>(r);
  return detail::read_bsr_body<double>(r);
}

inline AnyDense deserialize_dense(std::vector<char> bytes) {
  detail::ByteReader r(std::move(bytes));
  r.expect_magic(detail::dense_magic);
  if (detail::read_kind(r) == ScalarKind::f32) return detail::read_dense_body<float>(r);
  return detail::read_dense_body<double>(r);
}

template <Scalar T>
void save(const BsrMatrix<T>& w, const std::filesystem::path& path) {
  detail::write_file(path, serialize(w));
}

template <Scalar T>
void save(const DenseMatrix<T>& d, const std::filesystem::path& path) {
  detail::write_file(path, serialize(d));
}

inline AnyBsr load_bsr(const std::filesystem::path& path) {
  return deserialize_bsr(detail::read_file(path));
}

inline AnyDense load_dense(const std::filesystem::path& path) {
  return deserialize_dense(detail::read_file(path));
}

/// Loads a BSR file whose scalar kind must be T.
template <Scalar T>
BsrMatrix<T> load_bsr_as(const std::filesystem::path& path) {
  auto any = load_bsr(path);
  if (auto* w = std::get_if<BsrMatrix<T>>(&any)) return std::move(*w);
  throw Error(Errc::kind_mismatch, "'" + path.string() + "' holds " + to_string(kind_of_any(any)) +
                                       " data, expected " + to_string(kind_of<T>));
}

template <Scalar T>
DenseMatrix<T> load_dense_as(const std::filesystem::path& path) {
  auto any = load_dense(path);
  if (auto* d = std::get_if<DenseMatrix<T>>(&any)) return std::move(*d);
  throw Error(Errc::kind_mismatch, "'" + path.string() + "' holds " + to_string(kind_of_any(any)) +
                                       " data, expected " + to_string(kind_of<T>));
}

}  // namespace bsrspmm
