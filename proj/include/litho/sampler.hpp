#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "litho/layout.hpp"
#include "litho/learner.hpp"
#include "litho/qp.hpp"

namespace litho::sampler {

struct SamplerConfig {
  int n_query = 90;  // clips scored into each query set
  int k = 60;        // clips labeled per iteration
  std::optional<int> pool_cap = 2000;
  double qp_tol = 1e-7;
  int qp_max_iters = 5000;
  std::uint64_t seed = 1;
  int initial_size = 0;  // |L0|; 0 means k

  /// Throws Error{config} on k > n_query or non-positive sizes.
  void validate() const;
  /// True when k / n_query sits near 0.5, where the rounding allowance peaks.
  bool near_half_ratio() const;
  QpOptions qp() const { return {qp_tol, qp_max_iters, 1e-7}; }
};

/// Everything the sampling loop needs per clip. Column j of both matrices
/// belongs to ids[j].
struct ClipDataset {
  std::vector<ClipId> ids;
  Eigen::MatrixXf inputs;         // flattened feature tensors (model input)
  Eigen::MatrixXd init_vectors;   // unit channel vectors for the initial set

  Eigen::Index size() const { return static_cast<Eigen::Index>(ids.size()); }
};

/// Answers label queries; implementations count litho-clips.
class LabelOracle {
 public:
  virtual ~LabelOracle() = default;
  virtual Label query(ClipId id) = 0;
  virtual long litho_count() const = 0;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<ClipId> selected_ids;
  double f_relaxed = 0.0;
  double f_rounded = 0.0;
  double lambda_max = 0.0;
  double gap_bound = 0.0;
  long litho_total = 0;
};

struct SamplingResult {
  learner::MlpModel model;
  std::vector<Eigen::Index> labeled;    // dataset columns in L
  std::vector<Eigen::Index> discarded;  // dataset columns in D
  std::vector<Label> labels;            // per column; meaningful for labeled columns
  std::vector<IterationRecord> log;
  long train_steps = 0;
  long examples_trained = 0;  // sum of example presentations across updates
};

/// Selection of one batch of k out of the given diversity vectors (columns).
struct BatchChoice {
  std::vector<Eigen::Index> picked;  // positions into the candidate list, ascending
  Rounded<double> rounded;
  int qp_iterations = 0;
};

BatchChoice select_batch(const Eigen::MatrixXd& vectors, int k, const SamplerConfig& cfg);

/// Ids (ascending in score rank) of the min(n_query, |pool|) highest hotspot
/// probabilities, ties to the lowest position. `scores` is indexed like `pool`.
std::vector<Eigen::Index> top_scored(std::span<const Eigen::Index> pool, std::span<const float> scores, int n_query);

/// Optionally caps the pool by uniform subsampling, then keeps the n_query
/// columns the model rates most likely to be hotspots.
std::vector<Eigen::Index> uncertainty_filter(const learner::MlpModel& model, const Eigen::MatrixXf& inputs,
                                             std::span<const Eigen::Index> pool, int n_query,
                                             const SamplerConfig& cfg, std::mt19937_64& rng);

/// Initial labeled set: diversity QP over the channel vectors with k = k0.
std::vector<Eigen::Index> select_initial(const Eigen::MatrixXd& init_vectors, int k0, const SamplerConfig& cfg,
                                         std::mt19937_64& rng);

/// Called after every sampling iteration with the state so far.
using IterationHook = std::function<void(const IterationRecord&, const SamplingResult&)>;

/// Batch active sampling loop: label an initial diverse set, train, then until
/// the pool is empty repeatedly take the n_query most hotspot-like clips, label
/// the k most diverse of them (embedding Gram QP), discard the rest and
/// fine-tune the model.
SamplingResult batch_active_sampling(const ClipDataset& data, LabelOracle& oracle,
                                     const learner::TrainConfig& tcfg, const SamplerConfig& scfg,
                                     const IterationHook& hook = {});

}  // namespace litho::sampler
