#pragma once

// Sparse-dense products Y = X * W^T under four parallel schedules.
//
// Every schedule decomposes Y into independent work groups that write
// disjoint parts of Y. A group owns one or more lanes; each lane keeps a
// private partial sum and the partials are combined with tree_reduce. Lanes
// run sequentially inside a group, so only the reduction order is fixed, not
// any physical parallelism below the group level. That order depends only on
// the inputs, never on the worker count.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bsrspmm/bsr.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"
#include "bsrspmm/reduce.hpp"
#include "bsrspmm/work_pool.hpp"

namespace bsrspmm {

enum class ScheduleKind { pep, ptp, prob, prwb };

inline std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::pep: return "PEP";
    case ScheduleKind::ptp: return "PTP";
    case ScheduleKind::prob: return "PROB";
    case ScheduleKind::prwb: return "PRWB";
  }
  return "?";
}

inline ScheduleKind parse_schedule_kind(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "pep") return ScheduleKind::pep;
  if (lower == "ptp") return ScheduleKind::ptp;
  if (lower == "prob") return ScheduleKind::prob;
  if (lower == "prwb") return ScheduleKind::prwb;
  throw Error(Errc::invalid_argument, "unknown schedule '" + std::string(s) + "'");
}

/// PROB groups never hold more lanes than this; extra block columns are
/// handed out round-robin.
inline constexpr std::size_t prob_lane_cap = 256;

struct Schedule {
  ScheduleKind kind = ScheduleKind::pep;
  std::size_t tile_rows = 1;  // PTP
  std::size_t tile_cols = 1;  // PTP
  std::size_t lanes = 1;      // PRWB

  static Schedule pep() { return {ScheduleKind::pep}; }
  static Schedule ptp(std::size_t rows, std::size_t cols) { return {ScheduleKind::ptp, rows, cols, 1}; }
  static Schedule prob() { return {ScheduleKind::prob}; }
  static Schedule prwb(std::size_t t) { return {ScheduleKind::prwb, 1, 1, t}; }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

inline std::string describe(const Schedule& s) {
  std::string out(to_string(s.kind));
  if (s.kind == ScheduleKind::ptp)
    out += "(" + std::to_string(s.tile_rows) + "x" + std::to_string(s.tile_cols) + ")";
  else if (s.kind == ScheduleKind::prwb)
    out += "(t=" + std::to_string(s.lanes) + ")";
  return out;
}

namespace detail {

template <Scalar T>
void check_operands(const DenseMatrix<T>& x, const BsrMatrix<T>& w) {
  if (x.cols() != w.k())
    throw Error(Errc::shape_mismatch, "X has " + std::to_string(x.cols()) + " columns but W has k=" +
                                          std::to_string(w.k()));
}

/// Y_ij by a single accumulator: stored blocks of block row j / b_r in order,
/// columns left to right inside each block.
template <Scalar T>
T sequential_element(std::span<const T> x_row, const BsrMatrix<T>& w, std::size_t j) noexcept {
  const std::size_t br = w.block_rows(), bc = w.block_cols();
  const auto [first, last] = w.row_range(j / br);
  const T* data = w.block_data().data();
  const auto* idx = w.block_indices().data();
  const std::size_t local_row = j % br;
  T acc = T(0);
  for (std::size_t p = first; p < last; ++p) {
    const T* wrow = data + p * br * bc + local_row * bc;
    const T* xs = x_row.data() + idx[p] * bc;
    for (std::size_t c = 0; c < bc; ++c) acc += wrow[c] * xs[c];
  }
  return acc;
}

}  // namespace detail

/// Per-element parallelization: one group with one lane per output element.
template <Scalar T>
DenseMatrix<T> spmm_pep(const DenseMatrix<T>& x, const BsrMatrix<T>& w, const Executor& ex = {}) {
  detail::check_operands(x, w);
  const std::size_t m = x.rows(), n = w.n();
  DenseMatrix<T> y(m, n);
  auto out = y.data();
  ex.resolve().parallel_for(m * n, ex.chunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t i = g / n, j = g % n;
      out[g] = detail::sequential_element(x.row(i), w, j);
    }
  });
  return y;
}

/// Per-tile parallelization: one group per tile_rows x tile_cols tile of Y,
/// elements visited row-major inside the tile. Edge tiles may be smaller.
template <Scalar T>
DenseMatrix<T> spmm_ptp(const DenseMatrix<T>& x, const BsrMatrix<T>& w, std::size_t tile_rows,
                        std::size_t tile_cols, const Executor& ex = {}) {
  detail::check_operands(x, w);
  if (tile_rows == 0 || tile_cols == 0) throw Error(Errc::invalid_argument, "tile dims must be >= 1");
  const std::size_t m = x.rows(), n = w.n();
  const std::size_t tiles_down = (m + tile_rows - 1) / tile_rows;
  const std::size_t tiles_across = (n + tile_cols - 1) / tile_cols;
  DenseMatrix<T> y(m, n);
  ex.resolve().parallel_for(tiles_down * tiles_across, ex.chunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t i0 = (g / tiles_across) * tile_rows;
      const std::size_t j0 = (g % tiles_across) * tile_cols;
      const std::size_t i1 = std::min(i0 + tile_rows, m);
      const std::size_t j1 = std::min(j0 + tile_cols, n);
      for (std::size_t i = i0; i < i1; ++i) {
        auto x_row = x.row(i);
        for (std::size_t j = j0; j < j1; ++j) y(i, j) = detail::sequential_element(x_row, w, j);
      }
    }
  });
  return y;
}

/// Parallel reduction over blocks. Each output element gets one lane per
/// block column of W (capped at prob_lane_cap; lane p then also covers block
/// columns p + cap, p + 2 cap, ...). A lane is idle unless its block column is
/// stored in the element's block row, found by binary search. Active lanes
/// accumulate whole b_c-wide dot products left to right.
template <Scalar T>
DenseMatrix<T> spmm_prob(const DenseMatrix<T>& x, const BsrMatrix<T>& w, const Executor& ex = {}) {
  detail::check_operands(x, w);
  const std::size_t m = x.rows(), n = w.n();
  const std::size_t br = w.block_rows(), bc = w.block_cols();
  const std::size_t block_cols_total = w.num_block_cols();
  const std::size_t lanes = std::min(block_cols_total, prob_lane_cap);
  const T* data = w.block_data().data();
  const auto indices = w.block_indices();

  DenseMatrix<T> y(m, n);
  auto out = y.data();
  ex.resolve().parallel_for(m * n, ex.chunk, [&](std::size_t begin, std::size_t end) {
    std::vector<T> partials(std::bit_ceil(lanes));
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t i = g / n, j = g % n;
      const auto [first, last] = w.row_range(j / br);
      const auto row_cols = indices.subspan(first, last - first);
      const std::size_t local_row = j % br;
      const T* xrow = x.row(i).data();
      for (std::size_t lane = 0; lane < lanes; ++lane) {
        T acc = T(0);
        for (std::size_t q = lane; q < block_cols_total; q += lanes) {
          const auto it = std::lower_bound(row_cols.begin(), row_cols.end(), std::uint64_t{q});
          if (it == row_cols.end() || *it != q) continue;  // idle
          const std::size_t p = first + static_cast<std::size_t>(it - row_cols.begin());
          const T* wrow = data + p * br * bc + local_row * bc;
          const T* xs = xrow + q * bc;
          for (std::size_t c = 0; c < bc; ++c) acc += wrow[c] * xs[c];
        }
        partials[lane] = acc;
      }
      out[g] = tree_reduce_inplace(std::span<T>(partials), lanes);
    }
  });
  return y;
}

/// Parallel reduction within blocks with `t` lanes per output element. Lane l
/// owns block-local columns c with c % t == l in every stored block of the
/// row, so consecutive lanes touch consecutive elements. One accumulator per
/// lane spans all blocks. Lanes l >= b_c are idle. Requires t | k.
template <Scalar T>
DenseMatrix<T> spmm_prwb(const DenseMatrix<T>& x, const BsrMatrix<T>& w, std::size_t t,
                         const Executor& ex = {}) {
  detail::check_operands(x, w);
  if (t == 0 || w.k() % t != 0)
    throw Error(Errc::bad_lane_count, "lane count " + std::to_string(t) + " does not divide k=" +
                                          std::to_string(w.k()));
  const std::size_t m = x.rows(), n = w.n();
  const std::size_t br = w.block_rows(), bc = w.block_cols();
  const T* data = w.block_data().data();
  const auto* idx = w.block_indices().data();

  DenseMatrix<T> y(m, n);
  auto out = y.data();
  ex.resolve().parallel_for(m * n, ex.chunk, [&](std::size_t begin, std::size_t end) {
    std::vector<T> partials(std::bit_ceil(t));
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t i = g / n, j = g % n;
      const auto [first, last] = w.row_range(j / br);
      const std::size_t local_row = j % br;
      const T* xrow = x.row(i).data();
      std::fill_n(partials.begin(), t, T(0));
      // Blocks outer, lanes inner: each lane still sees its own elements in
      // block order, columns ascending.
      for (std::size_t p = first; p < last; ++p) {
        const T* wrow = data + p * br * bc + local_row * bc;
        const T* xs = xrow + idx[p] * bc;
        for (std::size_t c0 = 0; c0 < bc; c0 += t) {
          const std::size_t width = std::min(t, bc - c0);
          for (std::size_t l = 0; l < width; ++l) partials[l] += wrow[c0 + l] * xs[c0 + l];
        }
      }
      out[g] = tree_reduce_inplace(std::span<T>(partials), t);
    }
  });
  return y;
}

/// Checks a schedule's parameters against the operands without running it.
template <Scalar T>
void validate_schedule(const Schedule& s, const DenseMatrix<T>& x, const BsrMatrix<T>& w) {
  detail::check_operands(x, w);
  switch (s.kind) {
    case ScheduleKind::ptp:
      if (s.tile_rows == 0 || s.tile_cols == 0) throw Error(Errc::invalid_argument, "tile dims must be >= 1");
      break;
    case ScheduleKind::prwb:
      if (s.lanes == 0 || w.k() % s.lanes != 0)
        throw Error(Errc::bad_lane_count, "lane count " + std::to_string(s.lanes) + " does not divide k=" +
                                              std::to_string(w.k()));
      break;
    default: break;
  }
}

template <Scalar T>
DenseMatrix<T> run_schedule(const DenseMatrix<T>& x, const BsrMatrix<T>& w, const Schedule& s,
                            const Executor& ex = {}) {
  validate_schedule(s, x, w);
  switch (s.kind) {
    case ScheduleKind::pep: return spmm_pep(x, w, ex);
    case ScheduleKind::ptp: return spmm_ptp(x, w, s.tile_rows, s.tile_cols, ex);
    case ScheduleKind::prob: return spmm_prob(x, w, ex);
    case ScheduleKind::prwb: return spmm_prwb(x, w, s.lanes, ex);
  }
  throw Error(Errc::invalid_argument, "unknown schedule kind");
}

/// Runtime-typed dispatch; operands must share a scalar kind.
inline AnyDense run_schedule(const AnyDense& x, const AnyBsr& w, const Schedule& s, const Executor& ex = {}) {
  if (kind_of_any(x) != kind_of_any(w))
    throw Error(Errc::kind_mismatch, "X is " + to_string(kind_of_any(x)) + " but W is " +
                                         to_string(kind_of_any(w)));
  if (x.index() == 0) return run_schedule(std::get<0>(x), std::get<0>(w), s, ex);
  return run_schedule(std::get<1>(x), std::get<1>(w), s, ex);
}

}  // namespace bsrspmm
