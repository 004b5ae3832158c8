#pragma once

// Experiment-grid harness: generates one (X, W) pair per grid cell, verifies
// every schedule against the oracle, times it, and renders the results as a
// markdown or CSV table.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "bsrspmm/autotune.hpp"
#include "bsrspmm/compare.hpp"
#include "bsrspmm/generate.hpp"
#include "bsrspmm/kernels.hpp"
#include "bsrspmm/rng.hpp"
#include "bsrspmm/timing.hpp"

namespace bsrspmm {

struct GemmShape {
  std::size_t m = 1, k = 1, n = 1;
  friend bool operator==(const GemmShape&, const GemmShape&) = default;
};

/// A schedule column of the table. `autotune` replaces the fixed lane count
/// of a PRWB schedule with the best tuned one ("prwb+at").
struct BenchSchedule {
  Schedule schedule;
  bool autotune = false;

  std::string label() const { return autotune ? "PRWB+AT" : describe(schedule); }
};

enum class TableFormat { markdown, csv };

struct BenchConfig {
  std::vector<GemmShape> shapes{{1, 128, 768}, {8, 128, 768}, {1, 1024, 1024}, {8, 1024, 1024}};
  std::vector<std::size_t> block_sizes{8, 16, 32};
  std::vector<double> sparsities{0.8, 0.85, 0.95};
  std::vector<BenchSchedule> schedules{{Schedule::pep()},
                                       {Schedule::ptp(1, 16)},
                                       {Schedule::prob()},
                                       {Schedule::prwb(32)},
                                       {Schedule::prwb(1), true}};
  std::uint64_t seed = 0;
  std::size_t repeats = 11;
  std::size_t warmup = 3;
  ScalarKind kind = ScalarKind::f32;
  TableFormat format = TableFormat::markdown;
  std::size_t tune_budget = default_tune_budget;
  std::size_t lane_cap = default_lane_cap;
  ValueMode value_mode = ValueMode::uniform_real;
};

/// Throws Error(invalid_argument) describing the first problem found.
inline void validate(const BenchConfig& cfg) {
  if (cfg.repeats < 3 || cfg.repeats % 2 == 0) throw Error(Errc::invalid_argument, "repeats must be odd and >= 3");
  if (cfg.schedules.empty()) throw Error(Errc::invalid_argument, "no schedules selected");
  if (cfg.tune_budget == 0) throw Error(Errc::invalid_argument, "tuning budget must be >= 1");
  for (double s : cfg.sparsities)
    if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::invalid_argument, "sparsity outside [0, 1]");
  for (const auto& sh : cfg.shapes) {
    if (sh.m == 0 || sh.k == 0 || sh.n == 0) throw Error(Errc::invalid_argument, "shape dims must be positive");
    for (auto b : cfg.block_sizes) {
      if (b == 0 || sh.n % b != 0 || sh.k % b != 0)
        throw Error(Errc::invalid_argument, "block size " + std::to_string(b) + " does not divide shape " +
                                                std::to_string(sh.m) + "x" + std::to_string(sh.k) + "x" +
                                                std::to_string(sh.n));
      for (const auto& s : cfg.schedules) {
        if (s.schedule.kind == ScheduleKind::prwb && !s.autotune &&
            (s.schedule.lanes == 0 || sh.k % s.schedule.lanes != 0))
          throw Error(Errc::bad_lane_count, "lane count " + std::to_string(s.schedule.lanes) +
                                                " does not divide k=" + std::to_string(sh.k));
        if (s.schedule.kind == ScheduleKind::ptp && (s.schedule.tile_rows == 0 || s.schedule.tile_cols == 0))
          throw Error(Errc::invalid_argument, "tile dims must be >= 1");
      }
    }
  }
}

struct ScheduleResult {
  std::string label;
  bool verified = false;
  double max_error = 0.0;  // scaled error against the oracle
  TimingStats stats;       // zero when not verified
  std::optional<std::size_t> chosen_lanes;
  std::vector<TuningRecord> trials;  // autotuned schedules only
  std::string failure;
};

struct BenchCell {
  std::size_t index = 0;
  GemmShape shape;
  std::size_t block = 0;
  double sparsity = 0.0;
  std::size_t nnzb = 0;
  std::uint64_t w_seed = 0;
  std::uint64_t x_seed = 0;
  std::vector<ScheduleResult> results;

  bool verified() const {
    for (const auto& r : results)
      if (!r.verified) return false;
    return true;
  }
};

/// Seeds of cell `index`: one for W, one for X.
inline std::pair<std::uint64_t, std::uint64_t> cell_seeds(std::uint64_t seed, std::size_t index) {
  return {rng::derive_seed(seed, 2 * index), rng::derive_seed(seed, 2 * index + 1)};
}

struct SuiteHooks {
  Executor executor;
  std::function<void(const BenchCell&)> on_cell;  // progress reporting
};

namespace detail {

template <Scalar T>
void run_cell(const BenchConfig& cfg, BenchCell& cell, const SuiteHooks& hooks) {
  const auto& sh = cell.shape;
  const auto w = generate_bsr<T>({sh.n, sh.k, cell.block, cell.block, cell.sparsity, cell.w_seed, cfg.value_mode});
  const auto x = generate_dense<T>(sh.m, sh.k, cell.x_seed, cfg.value_mode);
  cell.nnzb = w.nnzb();
  const auto oracle = OracleReference::build(x, w);
  const auto& ex = hooks.executor;

  for (const auto& bs : cfg.schedules) {
    ScheduleResult r;
    r.label = bs.label();
    try {
      if (bs.autotune) {
        TuneOptions opt;
        opt.budget = cfg.tune_budget;
        opt.repeats = cfg.repeats;
        opt.plan_seed = cell.w_seed;
        opt.sparsity = cell.sparsity;
        opt.data_seed = cell.w_seed;
        opt.executor = ex;
        auto tuned = tune(x, w, candidate_lanes(sh.k, cfg.lane_cap), opt);
        r.verified = true;
        r.chosen_lanes = tuned.best.schedule.lanes;
        r.max_error = oracle.compare(spmm_prwb(x, w, tuned.best.schedule.lanes, ex)).max_scaled_error;
        r.stats = {tuned.best.median_ns, tuned.best.min_ns, tuned.best.mean_ns, tuned.best.repeats};
        r.trials = std::move(tuned.all_trials);
      } else {
        const auto check = oracle.compare(run_schedule(x, w, bs.schedule, ex));
        r.max_error = check.max_scaled_error;
        r.verified = check.within(oracle_tolerance<T>);
        if (r.verified)
          r.stats = measure([&] { return run_schedule(x, w, bs.schedule, ex); }, cfg.warmup, cfg.repeats);
        else
          r.failure = "oracle mismatch, scaled error " + std::to_string(check.max_scaled_error);
      }
    } catch (const Error& e) {
      r.verified = false;
      r.failure = e.what();
    }
    cell.results.push_back(std::move(r));
  }
}

}  // namespace detail

/// Cells in shape-major, then block size, then sparsity order.
inline std::vector<BenchCell> plan_cells(const BenchConfig& cfg) {
  std::vector<BenchCell> cells;
  for (const auto& sh : cfg.shapes)
    for (auto b : cfg.block_sizes)
      for (double s : cfg.sparsities) {
        BenchCell c;
        c.index = cells.size();
        c.shape = sh;
        c.block = b;
        c.sparsity = s;
        std::tie(c.w_seed, c.x_seed) = cell_seeds(cfg.seed, c.index);
        cells.push_back(c);
      }
  return cells;
}

inline std::vector<BenchCell> run_suite(const BenchConfig& cfg, const SuiteHooks& hooks = {}) {
  validate(cfg);
  auto cells = plan_cells(cfg);
  for (auto& cell : cells) {
    if (cfg.kind == ScalarKind::f32)
      detail::run_cell<float>(cfg, cell, hooks);
    else
      detail::run_cell<double>(cfg, cell, hooks);
    if (hooks.on_cell) hooks.on_cell(cell);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Table rendering

/// Milliseconds to three significant digits, e.g. 0.00912, 1.23, 1230.
inline std::string format_ms(double ms) {
  if (ms == 0.0) return "0";
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(ms))));
  const int decimals = std::max(0, 2 - magnitude);
  const double scale = std::pow(10.0, 2 - magnitude);
  const double rounded = std::round(ms * scale) / scale;
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  os << rounded;
  return os.str();
}

/// Shortest decimal that round-trips.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// RFC 4180 parser: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw Error(Errc::format, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Static numbers from other systems shown next to measured ones. Loaded
/// from a CSV whose header starts with m,k,n,block,sparsity followed by one
/// column per external system. Values are passed through verbatim.
struct ReferenceColumns {
  std::vector<std::string> names;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::string>, std::vector<std::string>>
      rows;

  static std::string key_sparsity(double s) { return format_number(s); }

  const std::vector<std::string>* find(const BenchCell& c) const {
    auto it = rows.find({c.shape.m, c.shape.k, c.shape.n, c.block, key_sparsity(c.sparsity)});
    return it == rows.end() ? nullptr : &it->second;
  }
};

inline ReferenceColumns parse_reference_csv(std::string_view text) {
  const auto table = parse_csv(text);
  if (table.empty()) throw Error(Errc::format, "reference CSV is empty");
  const auto& header = table.front();
  static const char* const coords[] = {"m", "k", "n", "block", "sparsity"};
  if (header.size() < 5) throw Error(Errc::format, "reference CSV needs columns m,k,n,block,sparsity");
  for (int i = 0; i < 5; ++i)
    if (header[i] != coords[i]) throw Error(Errc::format, std::string("reference CSV column ") +
                                                               std::to_string(i + 1) + " must be '" + coords[i] + "'");
  ReferenceColumns ref;
  ref.names.assign(header.begin() + 5, header.end());
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() != header.size())
      throw Error(Errc::format, "reference CSV row " + std::to_string(r + 1) + " has wrong field count");
    try {
      auto key = std::make_tuple(std::stoull(row[0]), std::stoull(row[1]), std::stoull(row[2]), std::stoull(row[3]),
                                 ReferenceColumns::key_sparsity(std::stod(row[4])));
      ref.rows[key] = std::vector<std::string>(row.begin() + 5, row.end());
    } catch (const std::logic_error&) {
      throw Error(Errc::format, "reference CSV row " + std::to_string(r + 1) + " has a non-numeric coordinate");
    }
  }
  return ref;
}

inline ReferenceColumns load_reference_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_reference_csv(ss.str());
}

/// Schedule labels in first-seen order across cells.
inline std::vector<std::string> schedule_labels(const std::vector<BenchCell>& cells) {
  std::vector<std::string> labels;
  for (const auto& c : cells)
    for (const auto& r : c.results)
      if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  return labels;
}

inline std::string emit_table(const std::vector<BenchCell>& cells, TableFormat format,
                              const std::vector<std::string>& labels, const ReferenceColumns* reference = nullptr) {
  const std::vector<std::string> coords{"m", "k", "n", "block", "sparsity"};
  std::vector<std::string> header = coords;
  for (const auto& l : labels) {
    if (format == TableFormat::markdown) {
      header.push_back(l + " (ms)");
    } else {
      header.push_back(l + "_ms");
      header.push_back(l + "_median_ns");
      header.push_back(l + "_min_ns");
    }
  }
  header.push_back("t");
  if (reference)
    for (const auto& name : reference->names) header.push_back(name);

  std::vector<std::vector<std::string>> body;
  for (const auto& c : cells) {
    std::vector<std::string> row{std::to_string(c.shape.m), std::to_string(c.shape.k), std::to_string(c.shape.n),
                                 std::to_string(c.block), format_number(c.sparsity)};
    std::string chosen = "-";
    for (const auto& l : labels) {
      const ScheduleResult* r = nullptr;
      for (const auto& cand : c.results)
        if (cand.label == l) r = &cand;
      if (!r) {
        row.push_back("-");
        if (format == TableFormat::csv) row.insert(row.end(), {"", ""});
        continue;
      }
      if (!r->verified) {
        row.push_back("FAIL");
        if (format == TableFormat::csv) row.insert(row.end(), {"", ""});
      } else {
        row.push_back(format_ms(static_cast<double>(r->stats.median_ns) / 1e6));
        if (format == TableFormat::csv) {
          row.push_back(std::to_string(r->stats.median_ns));
          row.push_back(std::to_string(r->stats.min_ns));
        }
      }
      if (r->chosen_lanes) chosen = std::to_string(*r->chosen_lanes);
    }
    row.push_back(chosen);
    if (reference) {
      const auto* vals = reference->find(c);
      for (std::size_t i = 0; i < reference->names.size(); ++i) row.push_back(vals ? (*vals)[i] : "-");
    }
    body.push_back(std::move(row));
  }

  std::string out;
  if (format == TableFormat::csv) {
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
      }
      out += "\r\n";
    };
    line(header);
    for (const auto& r : body) line(r);
    return out;
  }

  auto line = [&](const std::vector<std::string>& fields) {
    out += '|';
    for (const auto& f : fields) out += ' ' + f + " |";
    out += '\n';
  };
  line(header);
  out += '|';
  for (std::size_t i = 0; i < header.size(); ++i) out += i < coords.size() ? " :-- |" : " --: |";
  out += '\n';
  for (const auto& r : body) line(r);
  return out;
}

inline std::string emit_table(const std::vector<BenchCell>& cells, TableFormat format) {
  return emit_table(cells, format, schedule_labels(cells));
}

// ---------------------------------------------------------------------------
// Config parsing. Values use the command-line syntax; a config file is one
// flat JSON object whose keys are the flag names without dashes.

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::size_t parse_count(std::string_view s, const char* what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw Error(Errc::invalid_argument, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

inline double parse_fraction(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw Error(Errc::invalid_argument, "bad sparsity '" + std::string(s) + "'");
  return v;
}

inline GemmShape parse_shape(std::string_view s) {
  const auto parts = split(s, 'x');
  if (parts.size() != 3) throw Error(Errc::invalid_argument, "shape must be MxKxN, got '" + std::string(s) + "'");
  return {parse_count(parts[0], "m"), parse_count(parts[1], "k"), parse_count(parts[2], "n")};
}

inline std::pair<std::size_t, std::size_t> parse_tile(std::string_view s) {
  const auto parts = split(s, 'x');
  if (parts.size() != 2) throw Error(Errc::invalid_argument, "tile must be RxC, got '" + std::string(s) + "'");
  return {parse_count(parts[0], "tile rows"), parse_count(parts[1], "tile cols")};
}

inline std::vector<GemmShape> parse_shapes(std::string_view s) {
  std::vector<GemmShape> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_shape(p));
  return out;
}

inline std::vector<std::size_t> parse_counts(std::string_view s, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_count(p, what));
  return out;
}

inline std::vector<double> parse_fractions(std::string_view s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_fraction(p));
  return out;
}

inline ScalarKind parse_kind(std::string_view s) {
  if (s == "f32") return ScalarKind::f32;
  if (s == "f64") return ScalarKind::f64;
  throw Error(Errc::invalid_argument, "kind must be f32 or f64, got '" + std::string(s) + "'");
}

inline TableFormat parse_format(std::string_view s) {
  if (s == "md" || s == "markdown") return TableFormat::markdown;
  if (s == "csv") return TableFormat::csv;
  throw Error(Errc::invalid_argument, "format must be md or csv, got '" + std::string(s) + "'");
}

/// Schedule list like "pep,ptp,prob,prwb,prwb+at". PTP takes `tile`, PRWB
/// takes `lanes`.
inline std::vector<BenchSchedule> parse_schedules(std::string_view s, std::pair<std::size_t, std::size_t> tile,
                                                  std::size_t lanes) {
  std::vector<BenchSchedule> out;
  for (const auto& name : split(s, ',')) {
    if (name == "prwb+at" || name == "PRWB+AT") {
      out.push_back({Schedule::prwb(1), true});
      continue;
    }
    switch (parse_schedule_kind(name)) {
      case ScheduleKind::pep: out.push_back({Schedule::pep()}); break;
      case ScheduleKind::ptp: out.push_back({Schedule::ptp(tile.first, tile.second)}); break;
      case ScheduleKind::prob: out.push_back({Schedule::prob()}); break;
      case ScheduleKind::prwb: out.push_back({Schedule::prwb(lanes)}); break;
    }
  }
  return out;
}

/// Raw option values as strings, keyed by flag name.
using OptionMap = std::map<std::string, std::string>;

inline OptionMap parse_config_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::format, "config must be a flat JSON object");
  OptionMap out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out[key] = joined;
    } else if (value.is_number() || value.is_boolean()) {
      out[key] = value.dump();
    } else {
      throw Error(Errc::format, "config key '" + key + "' must be a string, number or array");
    }
  }
  return out;
}

inline OptionMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Builds a config from defaults overlaid with `opts`. Unknown keys are
/// rejected so typos in config files do not pass silently.
inline BenchConfig config_from_options(const OptionMap& opts) {
  static const char* const known[] = {"shapes",  "blocks", "sparsities", "schedules", "tile",
                                      "lanes",   "repeats", "warmup",    "seed",      "kind",
                                      "format",  "budget",  "values",    "out",       "records",
                                      "reference"};
  for (const auto& [key, _] : opts)
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
      throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");

  BenchConfig cfg;
  auto get = [&](const char* key) -> const std::string* {
    auto it = opts.find(key);
    return it == opts.end() ? nullptr : &it->second;
  };
  if (auto v = get("shapes")) cfg.shapes = parse_shapes(*v);
  if (auto v = get("blocks")) cfg.block_sizes = parse_counts(*v, "block size");
  if (auto v = get("sparsities")) cfg.sparsities = parse_fractions(*v);
  std::pair<std::size_t, std::size_t> tile{1, 16};
  std::size_t lanes = 32;
  if (auto v = get("tile")) tile = parse_tile(*v);
  if (auto v = get("lanes")) lanes = parse_count(*v, "lane count");
  if (auto v = get("schedules")) {
    cfg.schedules = parse_schedules(*v, tile, lanes);
  } else {
    for (auto& s : cfg.schedules) {
      if (s.schedule.kind == ScheduleKind::ptp) s.schedule = Schedule::ptp(tile.first, tile.second);
      if (s.schedule.kind == ScheduleKind::prwb && !s.autotune) s.schedule = Schedule::prwb(lanes);
    }
  }
  if (auto v = get("repeats")) cfg.repeats = parse_count(*v, "repeats");
  if (auto v = get("warmup")) cfg.warmup = parse_count(*v, "warmup");
  if (auto v = get("seed")) cfg.seed = parse_count(*v, "seed");
  if (auto v = get("kind")) cfg.kind = parse_kind(*v);
  if (auto v = get("format")) cfg.format = parse_format(*v);
  if (auto v = get("budget")) cfg.tune_budget = parse_count(*v, "budget");
  if (auto v = get("values")) cfg.value_mode = parse_value_mode(*v);
  return cfg;
}

}  // namespace bsrspmm
