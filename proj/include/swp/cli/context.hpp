#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"

#ifndef SWP_VERSION
#define SWP_VERSION "0.0.0"
#endif

namespace swp::cli {

inline constexpr std::string_view kToolVersion = SWP_VERSION;

enum class Stage { elicit, rate, similarity, features, analyze, align, report };

constexpr std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::elicit: return "elicit";
    case Stage::rate: return "rate";
    case Stage::similarity: return "similarity";
    case Stage::features: return "features";
    case Stage::analyze: return "analyze";
    case Stage::align: return "align";
    case Stage::report: return "report";
  }
  return "?";
}

// Stages whose outputs must already sit in the input directory.
inline std::vector<Stage> prerequisites(Stage s) {
  switch (s) {
    case Stage::rate: return {Stage::elicit};
    case Stage::similarity:
    case Stage::features: return {Stage::rate};
    case Stage::analyze: return {Stage::elicit, Stage::rate, Stage::similarity, Stage::features};
    case Stage::report: return {Stage::analyze};
    default: return {};
  }
}

// Everything one CLI invocation works from. `config` is the effective
// configuration after command-line overrides; its hash goes into every
// manifest.
struct RunContext {
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  std::filesystem::path data_dir;

  std::string config_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(config.dump())));
    return buf;
  }

  nlohmann::json section(const char* name) const { return config.value(name, nlohmann::json::object()); }

  std::string experiment_id() const {
    return config.value("experiment", nlohmann::json::object()).value("experiment_id", std::string("sp"));
  }
};

inline nlohmann::json read_json_file(const std::filesystem::path& p, Errc on_parse_error) {
  std::ifstream in(p);
  if (!in) throw Error(Errc::io_error, "cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(on_parse_error, p.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io_error, "cannot write " + p.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::json load_config(const std::optional<std::filesystem::path>& path,
                                  const std::filesystem::path& data_dir) {
  const auto p = path ? *path : data_dir / "config" / "default.json";
  auto j = read_json_file(p, Errc::invalid_config);
  if (!j.is_object()) throw Error(Errc::invalid_config, p.string() + ": top level must be an object");
  return j;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& dir, Stage s) {
  return dir / ("manifest." + std::string(to_string(s)) + ".json");
}

// One record per stage run. Wall-clock time lives here and nowhere else, so
// primary outputs stay byte-identical across reruns.
struct RunManifest {
  std::string experiment_id;
  std::string config_hash;
  Stage stage = Stage::elicit;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t rng_seed = 0;
  std::string tool_version{kToolVersion};
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return {{"experiment_id", experiment_id}, {"config_hash", config_hash}, {"stage", std::string(to_string(stage))},
            {"inputs", inputs},               {"outputs", outputs},         {"rng_seed", rng_seed},
            {"tool_version", tool_version},   {"extra", extra},             {"created_at", ts}};
  }
};

inline RunManifest make_manifest(const RunContext& ctx, Stage s) {
  RunManifest m;
  m.experiment_id = ctx.experiment_id();
  m.config_hash = ctx.config_hash();
  m.stage = s;
  m.rng_seed = ctx.seed;
  return m;
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  write_json_file(manifest_path(dir, m.stage), m.to_json());
}

inline nlohmann::json read_manifest(const std::filesystem::path& dir, Stage s) {
  return read_json_file(manifest_path(dir, s), Errc::corrupt_state);
}

// Throws io_error naming every prerequisite stage whose manifest is absent.
inline void require_stages(const std::filesystem::path& dir, Stage s) {
  std::string missing;
  for (auto pre : prerequisites(s))
    if (!std::filesystem::exists(manifest_path(dir, pre)))
      missing += (missing.empty() ? "" : ", ") + std::string(to_string(pre));
  if (!missing.empty())
    throw Error(Errc::io_error, std::string(to_string(s)) + " needs the outputs of: " + missing + " (in " +
                                    dir.string() + ")");
}

// CLI exit codes: 0 success, 2 configuration, 3 input, 4 runtime.
inline int exit_code(Errc c) {
  switch (c) {
    case Errc::invalid_config:
    case Errc::invalid_parameter:
    case Errc::infeasible_plan:
    case Errc::unknown_sentence:
    case Errc::unknown_tone:
    case Errc::missing_slot:
      return 2;
    case Errc::io_error:
    case Errc::schema_error:
    case Errc::corrupt_state:
    case Errc::invalid_item:
    case Errc::unknown_item:
    case Errc::empty_cell:
    case Errc::missing_pair:
    case Errc::missing_cell:
    case Errc::parse_error:
    case Errc::sentence_set_mismatch:
    case Errc::shape_mismatch:
    case Errc::empty_histogram:
    case Errc::insufficient_units:
    case Errc::missing_counterpart:
      return 3;
    default:
      return 4;
  }
}

}  // namespace swp::cli
