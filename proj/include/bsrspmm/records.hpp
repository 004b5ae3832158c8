#pragma once

// Tuning-record files: UTF-8, one flat JSON object per line. Writers append;
// readers keep going past malformed lines and report them.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsrspmm/autotune.hpp"
#include "bsrspmm/error.hpp"
#include "bsrspmm/kernels.hpp"

namespace bsrspmm {

inline nlohmann::json to_json(const TuningRecord& r) {
  return nlohmann::json{
      {"shape.m", r.shape.m},
      {"shape.k", r.shape.k},
      {"shape.n", r.shape.n},
      {"shape.br", r.shape.block_rows},
      {"shape.bc", r.shape.block_cols},
      {"sparsity", r.sparsity},
      {"seed", r.seed},
      {"schedule.kind", std::string(to_string(r.schedule.kind))},
      {"schedule.t", r.schedule.lanes},
      {"median_ns", r.median_ns},
      {"min_ns", r.min_ns},
      {"mean_ns", r.mean_ns},
      {"repeats", r.repeats},
      {"timestamp_iso8601", r.timestamp},
      {"env", r.env},
      {"valid", r.valid},
  };
}

/// Throws nlohmann::json exceptions or Error on missing/mistyped fields.
inline TuningRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::format, "record is not a JSON object");
  TuningRecord r;
  r.shape.m = j.at("shape.m").get<std::size_t>();
  r.shape.k = j.at("shape.k").get<std::size_t>();
  r.shape.n = j.at("shape.n").get<std::size_t>();
  r.shape.block_rows = j.at("shape.br").get<std::size_t>();
  r.shape.block_cols = j.at("shape.bc").get<std::size_t>();
  r.sparsity = j.at("sparsity").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.schedule.kind = parse_schedule_kind(j.at("schedule.kind").get<std::string>());
  r.schedule.lanes = j.at("schedule.t").get<std::size_t>();
  r.median_ns = j.at("median_ns").get<std::int64_t>();
  r.min_ns = j.at("min_ns").get<std::int64_t>();
  r.mean_ns = j.at("mean_ns").get<std::int64_t>();
  r.repeats = j.at("repeats").get<std::size_t>();
  r.timestamp = j.at("timestamp_iso8601").get<std::string>();
  r.env = j.at("env").get<std::string>();
  r.valid = j.at("valid").get<bool>();
  if (r.repeats < 1) throw Error(Errc::format, "repeats must be >= 1");
  if (r.min_ns > r.median_ns) throw Error(Errc::format, "min_ns exceeds median_ns");
  return r;
}

inline void save_records(const std::vector<TuningRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for appending");
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
}

struct RecordParseError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadedRecords {
  std::vector<TuningRecord> records;
  std::vector<RecordParseError> errors;
};

inline LoadedRecords load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for reading");
  LoadedRecords out;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      out.errors.push_back({no, e.what()});
    }
  }
  if (in.bad()) throw Error(Errc::io, "read failed for '" + path.string() + "'");
  return out;
}

}  // namespace bsrspmm
