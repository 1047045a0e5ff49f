#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "litho/features.hpp"
#include "litho/layout.hpp"
#include "litho/learner.hpp"
#include "litho/sampler.hpp"

namespace litho::bench {

enum class MotifKind : std::uint8_t { min_space_pair, pinch, mixed };

std::string_view to_string(MotifKind kind);
MotifKind motif_kind_from_string(std::string_view name);

/// Synthetic layout recipe. The layout is a grid of core-sized tiles; each
/// tile holds background wires/blocks drawn with legal (>= 40 nm) spacing, a
/// planted hotspot motif (sub-minimum gap or neck, one defect at its center)
/// or a decoy of the same family with legal dimensions.
struct SynthConfig {
  Coord width_nm = 70 * 230;
  Coord height_nm = 70 * 230;
  Coord tile_nm = 230;
  double rect_density = 0.85;  // probability that a background tile is non-empty
  int background_variants = 8;  // distinct background tiles drawn per layout; 0 = every tile fresh
  std::optional<int> motif_count;  // unset: derived from hotspot_rate_target
  double hotspot_rate_target = 0.05;
  double decoy_ratio = 1.0;  // decoys per motif
  MotifKind motif_kind = MotifKind::mixed;
  int duplication = 1;  // > 1 repeats a block of columns this many times
  std::uint64_t seed = 1;

  void validate() const;
  int resolved_motif_count() const;
};

/// Deterministic for a given config.
Layout generate_synthetic(const SynthConfig& cfg);

/// Lithography stand-in: answers from the layout's defect markers and charges
/// one litho-clip per distinct clip id. Thread-safe.
class LithoOracle final : public sampler::LabelOracle {
 public:
  LithoOracle(const Layout& layout, const std::vector<Clip>& clips, const ClipGeometry& geom);
  /// From known labels, e.g. a pre-cut labeled clip set.
  explicit LithoOracle(const std::map<ClipId, Label>& truth);

  Label query(ClipId id) override;
  long litho_count() const override;
  bool charged(ClipId id) const;

  /// Ground truth without charging; for metric computation only.
  Label truth(ClipId id) const;
  long total_hotspots() const { return total_hotspots_; }
  std::size_t size() const { return truth_.size(); }

 private:
  std::map<ClipId, Label> truth_;
  std::map<ClipId, bool> seen_;
  long total_hotspots_ = 0;
  long count_ = 0;
  mutable std::mutex mutex_;
};

struct RunMetrics {
  std::string method;
  std::uint64_t seed = 0;
  long hits = 0;
  long total_hotspots = 0;
  double accuracy = 0.0;  // hits / total_hotspots, 1 when there are none
  long extras = 0;
  long litho_clips = 0;
  long clips = 0;
  long wall_time_ms = 0;
};

/// Detection over the discarded columns with threshold 0.5. Hotspots found in
/// the labeled set count as hits; every discarded clip predicted hotspot is
/// verified through the oracle (one litho-clip unless already charged).
RunMetrics evaluate(const learner::MlpModel& model, const sampler::ClipDataset& data,
                    const std::vector<Eigen::Index>& labeled, const std::vector<Eigen::Index>& discarded,
                    LithoOracle& oracle);

/// Uniform random labeled set of `budget` clips, one training run, detection
/// on the rest.
RunMetrics run_random_baseline(const sampler::ClipDataset& data, LithoOracle& oracle, long budget,
                               const learner::TrainConfig& tcfg, std::uint64_t seed);

/// Starts from the given initial set and keeps labeling every pool clip the
/// model predicts hotspot, updating incrementally, until nothing new is
/// predicted or the pool is empty.
RunMetrics run_greedy_baseline(const sampler::ClipDataset& data, LithoOracle& oracle,
                               const std::vector<Eigen::Index>& initial, const learner::TrainConfig& tcfg,
                               std::uint64_t seed);

/// Groups clips with bit-identical rasters, labels one representative per
/// group and propagates its label.
RunMetrics run_exact_match_baseline(const Layout& layout, const std::vector<Clip>& clips, Coord pixel_nm,
                                    LithoOracle& oracle);

/// Batch active sampling plus final detection.
struct ActiveRun {
  RunMetrics metrics;
  sampler::SamplingResult result;
};
ActiveRun run_active(const sampler::ClipDataset& data, LithoOracle& oracle, const learner::TrainConfig& tcfg,
                     const sampler::SamplerConfig& scfg, const sampler::IterationHook& hook = {});

struct BenchConfig {
  SynthConfig synth;
  ClipGeometry geometry;
  features::FeatureConfig features;
  learner::TrainConfig train;
  sampler::SamplerConfig sampler;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<std::string> methods = {"active", "random", "greedy"};
  int threads = 1;

  void validate() const;
};

/// Synthetic benchmark instance for one seed.
struct Instance {
  Layout layout;
  std::vector<Clip> clips;
  sampler::ClipDataset data;
};

Instance make_instance(const BenchConfig& cfg, std::uint64_t seed);

/// Runs every method on every seed. The random baseline's budget matches the
/// active run's litho count on the same seed.
std::vector<RunMetrics> run_benchmark(const BenchConfig& cfg);

std::string metrics_csv_header(bool with_time);
std::string metrics_csv_row(const RunMetrics& m, bool with_time);

/// State of an active run after one sampling iteration, evaluated as if the
/// run stopped there: every unlabeled clip (pool or discarded) is scored by
/// the current model and each predicted hotspot is charged for verification.
struct CurvePoint {
  int iteration = 0;
  long samples_labeled = 0;
  long litho_clips = 0;  // samples_labeled + predicted-hotspot unlabeled clips
  long hits = 0;
  long extras = 0;
  double accuracy = 0.0;
};
std::vector<CurvePoint> accuracy_curve(const Instance& inst, const BenchConfig& cfg, std::uint64_t seed);
std::vector<CurvePoint> accuracy_curve(const BenchConfig& cfg, std::uint64_t seed);

/// First point whose accuracy reaches `target`, if any.
std::optional<CurvePoint> first_reaching(const std::vector<CurvePoint>& curve, double target);

}  // namespace litho::bench
