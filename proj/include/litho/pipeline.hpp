#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "litho/bench.hpp"
#include "litho/error.hpp"
#include "litho/features.hpp"
#include "litho/layout.hpp"
#include "litho/learner.hpp"
#include "litho/sampler.hpp"

namespace litho::pipeline {

namespace fs = std::filesystem;

/// Everything one flow run needs. Either `synthetic` is set or a layout path
/// is given; a clips path switches to a pre-cut clip set.
struct PipelineConfig {
  bool synthetic = false;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<fs::path> layout_path;
  std::optional<fs::path> clips_path;
  fs::path out_dir = "flow_out";

  ClipGeometry geometry;
  features::FeatureConfig features;
  learner::TrainConfig train;
  sampler::SamplerConfig sampler;
  bench::SynthConfig synth;

  /// Cross-field checks; throws Error{config}. Runs before any work.
  void validate() const;
};

// Config JSON. Every section and key is optional; unknown keys are errors.
//   {"seed":1, "threads":1, "synthetic":true,
//    "paths":{"layout":"..", "clips":"..", "out_dir":".."},
//    "geometry":{...}, "features":{...}, "learner":{...}, "sampler":{...},
//    "synth":{...}}
// bench configs add "seeds":[..] and "methods":[..] at the top level.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
bench::BenchConfig bench_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

PipelineConfig load_pipeline_config(const fs::path& path);
bench::BenchConfig load_bench_config(const fs::path& path);

/// Artifact names inside the flow output directory.
inline constexpr const char* kSelectionLog = "selection_log.jsonl";
inline constexpr const char* kCheckpoint = "model.ckpt";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kRunInfo = "run.json";

/// Full flow: dispatch, extract, batch active sampling, detection, report.
/// metrics.csv carries no timing so reruns are byte-identical; wall time goes
/// to run.json.
bench::RunMetrics run_flow(const PipelineConfig& cfg);

/// Dispatches a layout file into a labeled clip-set JSON.
std::size_t cmd_dispatch(const fs::path& layout, const ClipGeometry& geom, const fs::path& out);

/// Extracts a feature store for a clip set (dispatched when `clips` is unset).
std::size_t cmd_extract(const fs::path& layout, const std::optional<fs::path>& clips, const ClipGeometry& geom,
                        const features::FeatureConfig& fcfg, int threads, const fs::path& out);

/// Runs batch active sampling on a labeled feature store and writes the
/// selection as JSON.
sampler::SamplingResult cmd_sample(const fs::path& features_path, const features::FeatureConfig& fcfg,
                                   const learner::TrainConfig& tcfg, const sampler::SamplerConfig& scfg,
                                   const fs::path& out);

void cmd_bench_run(const bench::BenchConfig& cfg, const fs::path& out);
void cmd_bench_curve(const bench::BenchConfig& cfg, std::uint64_t seed, const fs::path& out);

/// Machine-readable error record and process exit code per error kind.
nlohmann::json error_json(const Error& e);
int exit_code(ErrorKind kind);

/// Thread count: explicit flag, else LITHO_SAMPLER_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

}  // namespace litho::pipeline
