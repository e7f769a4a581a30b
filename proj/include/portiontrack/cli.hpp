#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "portiontrack/baselines.hpp"
#include "portiontrack/evaluation.hpp"
#include "portiontrack/features.hpp"
#include "portiontrack/portion.hpp"
#include "portiontrack/tracker.hpp"

namespace ptrack {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitValidation = 2, kExitData = 3 };

struct PipelineConfig {
  std::filesystem::path dataset;
  std::filesystem::path output = "out";
  FeatureConfig features;
  PortionSpec portion;
  BaselineConfig baseline;
  Method method = Method::dfmt;
  std::uint64_t seed = 0;
  /// 0 = OpenMP default; PORTIONTRACK_THREADS wins over this.
  int threads = 0;

  void validate() const;
};

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to `j`. The value is parsed as JSON when possible
/// and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Reads the config file (if any), applies overrides and the thread
/// environment variable.
PipelineConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides);

/// Thread count after PORTIONTRACK_THREADS.
int effective_threads(int configured);

int cmd_synth(const std::filesystem::path& script, const std::filesystem::path& out_dir, std::uint64_t seed);
int cmd_features(const PipelineConfig& cfg);
int cmd_track(const PipelineConfig& cfg);
int cmd_eval(const std::filesystem::path& tracks, const std::filesystem::path& gt,
             const std::optional<std::filesystem::path>& report);
int cmd_corrmap(const PipelineConfig& cfg, std::uint32_t object_id, int frame, bool include_self);
int cmd_bench(const PipelineConfig& cfg);

struct BenchEntry {
  std::string dataset;
  Method method = Method::dfmt;
  EvalReport report;
  TrackGraph graph;
  double seconds = 0.0;
};

/// default_benchmark(cfg.seed) tracked with every method in `methods`.
/// `keep` selects datasets by name (all when empty).
std::vector<BenchEntry> run_benchmark(const PipelineConfig& cfg, const std::vector<Method>& methods,
                                      const std::function<bool(const std::string&)>& keep = {},
                                      const std::function<void(const BenchEntry&)>& progress = {});

/// Per-dataset tables followed by a pooled table per method (confusions
/// summed, tracking accuracy averaged over datasets).
std::string bench_report(const std::vector<BenchEntry>& entries);

/// Entry point of the portiontrack executable; returns the exit code.
int run_cli(int argc, char** argv);

}  // namespace ptrack
