// bsrbench: command-line front end for the bsrspmm library.
//
//   bsrbench bench  [grid flags]          run the experiment grid, print a table
//   bsrbench tune   [single-cell flags]   autotune PRWB lanes for one cell
//   bsrbench gen    --matrix bsr|dense    write a generated matrix file
//   bsrbench verify X_FILE W_FILE         check every schedule against the oracle
//
// Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "bsrspmm/bsrspmm.hpp"

namespace {

using namespace bsrspmm;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by `bench` and `tune`. Empty means "not given".
struct GridFlags {
  std::string shapes, blocks, sparsities, schedules, tile, lanes, repeats, warmup, seed, kind, format, budget,
      values;
  std::string out, records, config, reference;

  void add_to(CLI::App& cmd, bool with_schedules) {
    cmd.add_option("--shapes", shapes, "MxKxN[,...]");
    cmd.add_option("--blocks", blocks, "square block sizes B[,...]");
    cmd.add_option("--sparsities", sparsities, "block sparsities F[,...]");
    if (with_schedules) {
      cmd.add_option("--schedules", schedules, "pep,ptp,prob,prwb,prwb+at");
      cmd.add_option("--tile", tile, "PTP tile RxC (default 1x16)");
      cmd.add_option("--lanes", lanes, "PRWB lane count T (default 32)");
      cmd.add_option("--format", format, "md|csv");
      cmd.add_option("--out", out, "write the table to PATH");
      cmd.add_option("--config", config, "flat JSON config file; flags override it");
      cmd.add_option("--reference", reference, "CSV of static reference columns");
    }
    cmd.add_option("--repeats", repeats, "timed runs (odd, >= 3)");
    cmd.add_option("--warmup", warmup, "untimed runs before timing");
    cmd.add_option("--seed", seed, "base seed");
    cmd.add_option("--kind", kind, "f32|f64");
    cmd.add_option("--budget", budget, "max tuning trials (default 200)");
    cmd.add_option("--values", values, "uniform_real|small_int");
    cmd.add_option("--records", records, "append tuning records to PATH");
  }

  OptionMap overlay(OptionMap base) const {
    auto set = [&](const char* key, const std::string& v) {
      if (!v.empty()) base[key] = v;
    };
    set("shapes", shapes);
    set("blocks", blocks);
    set("sparsities", sparsities);
    set("schedules", schedules);
    set("tile", tile);
    set("lanes", lanes);
    set("repeats", repeats);
    set("warmup", warmup);
    set("seed", seed);
    set("kind", kind);
    set("format", format);
    set("budget", budget);
    set("values", values);
    set("out", out);
    set("records", records);
    set("reference", reference);
    return base;
  }
};

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot open '" + path + "' for writing");
  f << text;
}

int run_bench(const GridFlags& flags) {
  OptionMap opts = flags.config.empty() ? OptionMap{} : load_config_file(flags.config);
  opts = flags.overlay(std::move(opts));
  BenchConfig cfg;
  try {
    cfg = config_from_options(opts);
    validate(cfg);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::optional<ReferenceColumns> reference;
  if (auto it = opts.find("reference"); it != opts.end()) reference = load_reference_csv(it->second);
  const std::string records_path = opts.count("records") ? opts.at("records") : "";

  SuiteHooks hooks;
  const std::size_t total = cfg.shapes.size() * cfg.block_sizes.size() * cfg.sparsities.size();
  hooks.on_cell = [&](const BenchCell& c) {
    std::fprintf(stderr, "[%zu/%zu] %zux%zux%zu b=%zu s=%s nnzb=%zu %s\n", c.index + 1, total, c.shape.m,
                 c.shape.k, c.shape.n, c.block, format_number(c.sparsity).c_str(), c.nnzb,
                 c.verified() ? "ok" : "FAILED");
    for (const auto& r : c.results)
      if (!r.verified) std::fprintf(stderr, "    %s: %s\n", r.label.c_str(), r.failure.c_str());
    if (!records_path.empty())
      for (const auto& r : c.results)
        if (!r.trials.empty()) save_records(r.trials, records_path);
  };
  const auto cells = run_suite(cfg, hooks);

  std::vector<std::string> labels;
  for (const auto& s : cfg.schedules) labels.push_back(s.label());
  write_output(emit_table(cells, cfg.format, labels, reference ? &*reference : nullptr),
               opts.count("out") ? opts.at("out") : "");
  for (const auto& c : cells)
    if (!c.verified()) return exit_failure;
  return exit_ok;
}

template <Scalar T>
int tune_cell(const BenchConfig& cfg, const std::string& records_path) {
  const auto sh = cfg.shapes.front();
  const auto b = cfg.block_sizes.front();
  const auto sparsity = cfg.sparsities.front();
  const auto [w_seed, x_seed] = cell_seeds(cfg.seed, 0);
  const auto w = generate_bsr<T>({sh.n, sh.k, b, b, sparsity, w_seed, cfg.value_mode});
  const auto x = generate_dense<T>(sh.m, sh.k, x_seed, cfg.value_mode);

  TuneOptions opt;
  opt.budget = cfg.tune_budget;
  opt.repeats = cfg.repeats;
  opt.plan_seed = w_seed;
  opt.sparsity = sparsity;
  opt.data_seed = w_seed;
  const auto space = candidate_lanes(sh.k, cfg.lane_cap);
  const auto result = tune(x, w, space, opt);

  std::printf("shape %zux%zux%zu block %zu sparsity %s nnzb %zu kind %s\n", sh.m, sh.k, sh.n, b,
              format_number(sparsity).c_str(), w.nnzb(), to_string(kind_of<T>).c_str());
  std::printf("%8s %14s %14s %14s %6s\n", "t", "median_ns", "min_ns", "mean_ns", "valid");
  for (const auto& r : result.all_trials)
    std::printf("%8zu %14lld %14lld %14lld %6s\n", r.schedule.lanes, static_cast<long long>(r.median_ns),
                static_cast<long long>(r.min_ns), static_cast<long long>(r.mean_ns), r.valid ? "yes" : "no");
  std::printf("best t=%zu median %s ms (%zu trials of %zu candidates)\n", result.best.schedule.lanes,
              format_ms(static_cast<double>(result.best.median_ns) / 1e6).c_str(), result.budget_used,
              space.candidates.size());
  if (!records_path.empty()) save_records(result.all_trials, records_path);
  return exit_ok;
}

int run_tune(const GridFlags& flags) {
  OptionMap opts = flags.overlay({});
  if (!opts.count("shapes")) opts["shapes"] = "1x128x768";
  if (!opts.count("blocks")) opts["blocks"] = "8";
  if (!opts.count("sparsities")) opts["sparsities"] = "0.8";
  BenchConfig cfg;
  try {
    cfg = config_from_options(opts);
    cfg.schedules = {{Schedule::prwb(1), true}};
    if (cfg.shapes.size() != 1 || cfg.block_sizes.size() != 1 || cfg.sparsities.size() != 1)
      throw Error(Errc::invalid_argument, "tune takes exactly one shape, block size and sparsity");
    validate(cfg);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const std::string records_path = opts.count("records") ? opts.at("records") : "";
  return cfg.kind == ScalarKind::f32 ? tune_cell<float>(cfg, records_path) : tune_cell<double>(cfg, records_path);
}

struct GenFlags {
  std::string matrix = "bsr";
  std::size_t rows = 0, cols = 0, block = 1;
  double sparsity = 0.0;
  std::uint64_t seed = 0;
  std::string values = "uniform_real";
  std::string kind = "f32";
  std::string out;
};

template <Scalar T>
void generate_to_file(const GenFlags& g) {
  const auto mode = parse_value_mode(g.values);
  if (g.matrix == "dense") {
    save(generate_dense<T>(g.rows, g.cols, g.seed, mode), g.out);
    std::fprintf(stderr, "wrote %zux%zu dense matrix to %s\n", g.rows, g.cols, g.out.c_str());
  } else {
    const auto w = generate_bsr<T>({g.rows, g.cols, g.block, g.block, g.sparsity, g.seed, mode});
    save(w, g.out);
    std::fprintf(stderr, "wrote %zux%zu BSR matrix (b=%zu, nnzb=%zu) to %s\n", g.rows, g.cols, g.block, w.nnzb(),
                 g.out.c_str());
  }
}

int run_gen(const GenFlags& g) {
  ScalarKind kind;
  try {
    kind = parse_kind(g.kind);
    parse_value_mode(g.values);
    if (g.rows == 0 || g.cols == 0) throw Error(Errc::invalid_argument, "--rows and --cols must be positive");
    if (g.matrix == "bsr") {
      if (g.block == 0 || g.rows % g.block != 0 || g.cols % g.block != 0)
        throw Error(Errc::invalid_argument, "--block must divide --rows and --cols");
      if (!(g.sparsity >= 0.0 && g.sparsity <= 1.0))
        throw Error(Errc::invalid_argument, "--sparsity must lie in [0, 1]");
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (kind == ScalarKind::f32)
    generate_to_file<float>(g);
  else
    generate_to_file<double>(g);
  return exit_ok;
}

struct VerifyFlags {
  std::string x_path, w_path, tile = "1x16";
  std::size_t lanes = 0;  // 0: every divisor of k up to the lane cap
};

template <Scalar T>
int verify_pair(const DenseMatrix<T>& x, const BsrMatrix<T>& w, const VerifyFlags& f) {
  if (x.cols() != w.k())
    throw Error(Errc::shape_mismatch, "X is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                                          " but W has k=" + std::to_string(w.k()));
  const auto tile = parse_tile(f.tile);
  std::vector<Schedule> schedules{Schedule::pep(), Schedule::ptp(tile.first, tile.second), Schedule::prob()};
  if (f.lanes != 0) {
    schedules.push_back(Schedule::prwb(f.lanes));
  } else {
    for (auto t : candidate_lanes(w.k()).candidates) schedules.push_back(Schedule::prwb(t));
  }
  const auto oracle = OracleReference::build(x, w);
  bool all_ok = true;
  for (const auto& s : schedules) {
    const auto cmp = oracle.compare(run_schedule(x, w, s));
    const bool ok = cmp.within(oracle_tolerance<T>);
    all_ok = all_ok && ok;
    std::printf("%-14s %s  max_scaled_error=%.3e  bit_identical=%s\n", describe(s).c_str(), ok ? "PASS" : "FAIL",
                cmp.max_scaled_error, cmp.bit_identical ? "yes" : "no");
  }
  return all_ok ? exit_ok : exit_failure;
}

int run_verify(const VerifyFlags& f) {
  const auto x = load_dense(f.x_path);
  const auto w = load_bsr(f.w_path);
  if (kind_of_any(x) != kind_of_any(w))
    throw Error(Errc::kind_mismatch, "X is " + to_string(kind_of_any(x)) + " but W is " + to_string(kind_of_any(w)));
  if (x.index() == 0) return verify_pair(std::get<0>(x), std::get<0>(w), f);
  return verify_pair(std::get<1>(x), std::get<1>(w), f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-sparse SpMM schedules: benchmark, tune, generate and verify"};
  app.require_subcommand(1);

  GridFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "run the (shape x block x sparsity) grid and print a table");
  bench_flags.add_to(*bench, true);

  GridFlags tune_flags;
  auto* tune_cmd = app.add_subcommand("tune", "autotune the PRWB lane count for one cell");
  tune_flags.add_to(*tune_cmd, false);

  GenFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "write a generated BSR or dense matrix file");
  gen->add_option("--matrix", gen_flags.matrix, "bsr|dense")->check(CLI::IsMember({"bsr", "dense"}));
  gen->add_option("--rows", gen_flags.rows, "rows (n for BSR)")->required();
  gen->add_option("--cols", gen_flags.cols, "cols (k for BSR)")->required();
  gen->add_option("--block", gen_flags.block, "square block size (BSR)");
  gen->add_option("--sparsity", gen_flags.sparsity, "fraction of zero blocks (BSR)");
  gen->add_option("--seed", gen_flags.seed, "seed");
  gen->add_option("--values", gen_flags.values, "uniform_real|small_int");
  gen->add_option("--kind", gen_flags.kind, "f32|f64");
  gen->add_option("--out", gen_flags.out, "output path")->required();

  VerifyFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "compare every schedule against the dense oracle");
  verify->add_option("x_file", verify_flags.x_path, "dense X file")->required();
  verify->add_option("w_file", verify_flags.w_path, "BSR W file")->required();
  verify->add_option("--tile", verify_flags.tile, "PTP tile RxC");
  verify->add_option("--lanes", verify_flags.lanes, "PRWB lane count (default: all divisors of k)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  try {
    if (bench->parsed()) return run_bench(bench_flags);
    if (tune_cmd->parsed()) return run_tune(tune_flags);
    if (gen->parsed()) return run_gen(gen_flags);
    if (verify->parsed()) return run_verify(verify_flags);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_usage;
}
