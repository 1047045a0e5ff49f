#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "litho/error.hpp"
#include "litho/layout.hpp"

namespace litho::learner {

struct TrainConfig {
  double alpha = 0.05;  // learning rate
  double sigma = 0.05;  // init std of the weights
  int batch_size = 32;
  int epochs_initial = 30;
  int epochs_update = 3;
  double eps0 = 0.2;         // initial label bias on non-hotspot targets
  long total_bias_steps = 0;  // T; 0 means "length of the initial training phase"
  std::uint64_t seed = 1;
  std::vector<int> hidden = {64, 32};

  void validate() const;
};

/// Soft target for the two classes.
struct Target {
  double hotspot = 0.0;
  double non_hotspot = 0.0;
};

/// Linearly decaying label bias: a non-hotspot example at step t is trained
/// toward (eps(t), 1 - eps(t)) with eps(t) = eps0 * max(0, 1 - t / T).
/// Hotspots always target (1, 0).
Target bias_target(Label label, long t, const TrainConfig& cfg);

/// Fully connected network, ReLU hidden layers and a 2-way softmax output
/// (row 0 = non-hotspot, row 1 = hotspot). Examples are matrix columns.
template <typename Scalar>
struct BasicMlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  std::vector<int> dims;  // input, hidden..., 2
  std::vector<Layer> layers;
  long step = 0;          // gradient steps taken so far
  long bias_horizon = 0;  // T used by bias_target

  int input_dim() const { return dims.front(); }
};

using MlpModel = BasicMlp<float>;

/// Weights ~ N(0, sigma) from a PRNG seeded by cfg.seed; zero biases.
template <typename Scalar>
BasicMlp<Scalar> init_model(const TrainConfig& cfg, int input_dim) {
  cfg.validate();
  if (input_dim <= 0) throw Error(ErrorKind::config, "learner", "init_model", "input_dim must be positive");
  BasicMlp<Scalar> m;
  m.dims.push_back(input_dim);
  for (int h : cfg.hidden) m.dims.push_back(h);
  m.dims.push_back(2);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, cfg.sigma);
  for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
    typename BasicMlp<Scalar>::Layer layer;
    layer.weight.resize(m.dims[l + 1], m.dims[l]);
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = static_cast<Scalar>(normal(rng));
    }
    layer.bias = BasicMlp<Scalar>::Vector::Zero(m.dims[l + 1]);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

/// Activations of every layer for a batch; acts[0] is the input, acts.back()
/// the softmax output.
template <typename Scalar>
std::vector<typename BasicMlp<Scalar>::Matrix> forward(const BasicMlp<Scalar>& m,
                                                       const typename BasicMlp<Scalar>::Matrix& x) {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  if (x.rows() != m.input_dim()) {
    throw Error(ErrorKind::domain, "learner", "forward",
                "input has " + std::to_string(x.rows()) + " rows, model expects " + std::to_string(m.input_dim()));
  }
  std::vector<Matrix> acts;
  acts.reserve(m.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Matrix z = m.layers[l].weight * acts.back();
    z.colwise() += m.layers[l].bias;
    if (l + 1 < m.layers.size()) {
      z = z.cwiseMax(Scalar(0));
    } else {
      // numerically stable softmax per column
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const Scalar top = z.col(c).maxCoeff();
        z.col(c) = (z.col(c).array() - top).exp().matrix();
        z.col(c) /= z.col(c).sum();
      }
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

/// p(y = hotspot | x) for every column of x.
template <typename Scalar>
typename BasicMlp<Scalar>::Vector predict_proba(const BasicMlp<Scalar>& m,
                                                const typename BasicMlp<Scalar>::Matrix& x) {
  return forward(m, x).back().row(1).transpose();
}

template <typename Scalar>
Scalar predict_proba(const BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Vector& x) {
  return predict_proba(m, typename BasicMlp<Scalar>::Matrix(x))(0);
}

/// Penultimate-layer activations, each column L2-normalized (zero stays zero).
template <typename Scalar>
typename BasicMlp<Scalar>::Matrix embed(const BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& x) {
  auto acts = forward(m, x);
  auto e = std::move(acts[acts.size() - 2]);
  for (Eigen::Index c = 0; c < e.cols(); ++c) {
    const Scalar n = e.col(c).norm();
    if (n > Scalar(0)) e.col(c) /= n;
  }
  return e;
}

/// Targets as a 2 x B matrix (row 0 non-hotspot, row 1 hotspot).
template <typename Scalar>
typename BasicMlp<Scalar>::Matrix target_matrix(std::span<const Label> labels, long t, const TrainConfig& cfg) {
  typename BasicMlp<Scalar>::Matrix targets(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Target tg = bias_target(labels[i], t, cfg);
    targets(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(tg.non_hotspot);
    targets(1, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(tg.hotspot);
  }
  return targets;
}

/// Mean cross-entropy -1/B sum_i sum_c t_ci log p_ci.
template <typename Scalar>
Scalar loss(const BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& x,
            const typename BasicMlp<Scalar>::Matrix& targets) {
  const auto probs = forward(m, x).back();
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  return -(targets.array() * probs.array().max(tiny).log()).sum() / Scalar(x.cols());
}

/// d loss / d parameters, same shapes as the model layers.
template <typename Scalar>
std::vector<typename BasicMlp<Scalar>::Layer> gradient(const BasicMlp<Scalar>& m,
                                                       const typename BasicMlp<Scalar>::Matrix& x,
                                                       const typename BasicMlp<Scalar>::Matrix& targets) {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  const auto acts = forward(m, x);
  std::vector<typename BasicMlp<Scalar>::Layer> grads(m.layers.size());
  // softmax + cross-entropy with targets summing to one
  Matrix delta = (acts.back() - targets) / Scalar(x.cols());
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    grads[l].weight.noalias() = delta * acts[l].transpose();
    grads[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = m.layers[l].weight.transpose() * delta;
      delta = (acts[l].array() > Scalar(0)).select(back, Scalar(0));
    }
  }
  return grads;
}

/// One descent step w <- w - alpha * grad toward explicit soft targets;
/// increments m.step. Throws Error{training} when the gradient is not finite.
template <typename Scalar>
void descent_step(BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& x,
                  const typename BasicMlp<Scalar>::Matrix& targets, double alpha) {
  if (x.cols() == 0) throw Error(ErrorKind::training, "learner", "train_step", "empty batch");
  const auto grads = gradient(m, x, targets);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    if (!grads[l].weight.allFinite() || !grads[l].bias.allFinite()) {
      throw Error(ErrorKind::training, "learner", "train_step",
                  "non-finite gradient in layer " + std::to_string(l) + " at step " + std::to_string(m.step));
    }
  }
  const Scalar rate = static_cast<Scalar>(alpha);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    m.layers[l].weight -= rate * grads[l].weight;
    m.layers[l].bias -= rate * grads[l].bias;
  }
  ++m.step;
}

/// Descent step on labeled examples with the biased targets of step m.step.
template <typename Scalar>
void train_step(BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& x, std::span<const Label> labels,
                const TrainConfig& cfg) {
  TrainConfig bias_cfg = cfg;
  if (m.bias_horizon > 0) bias_cfg.total_bias_steps = m.bias_horizon;
  descent_step(m, x, target_matrix<Scalar>(labels, m.step, bias_cfg), cfg.alpha);
}

/// Runs `epochs` shuffled mini-batch passes over the selected columns.
/// Returns the number of steps executed.
template <typename Scalar>
long train_epochs(BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& data, std::span<const Label> labels,
                  std::vector<Eigen::Index> ids, int epochs, const TrainConfig& cfg, std::mt19937_64& rng) {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  if (ids.empty() || epochs <= 0) return 0;
  const std::size_t bs = static_cast<std::size_t>(std::max(1, cfg.batch_size));
  long steps = 0;
  Matrix batch;
  std::vector<Label> batch_labels;
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t start = 0; start < ids.size(); start += bs) {
      const std::size_t n = std::min(bs, ids.size() - start);
      batch.resize(data.rows(), static_cast<Eigen::Index>(n));
      batch_labels.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        batch.col(static_cast<Eigen::Index>(k)) = data.col(ids[start + k]);
        batch_labels[k] = labels[static_cast<std::size_t>(ids[start + k])];
      }
      train_step(m, batch, batch_labels, cfg);
      ++steps;
    }
  }
  return steps;
}

/// Number of steps train_epochs performs for `count` examples.
long steps_for(std::size_t count, int epochs, const TrainConfig& cfg);

/// Trains a fresh model from its labeled set for cfg.epochs_initial epochs and
/// fixes the bias horizon T to the length of that phase unless configured.
template <typename Scalar>
long train_initial(BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& data, std::span<const Label> labels,
                   const std::vector<Eigen::Index>& ids, const TrainConfig& cfg, std::mt19937_64& rng) {
  m.bias_horizon = cfg.total_bias_steps > 0 ? cfg.total_bias_steps : steps_for(ids.size(), cfg.epochs_initial, cfg);
  return train_epochs(m, data, labels, ids, cfg.epochs_initial, cfg, rng);
}

/// Fine-tunes on the new batch plus a uniform replay sample of
/// min(|old|, 4 |new|) previously labeled examples. Never reinitializes.
/// Returns the number of steps executed.
template <typename Scalar>
long incremental_update(BasicMlp<Scalar>& m, const typename BasicMlp<Scalar>::Matrix& data,
                        std::span<const Label> labels, const std::vector<Eigen::Index>& old_ids,
                        const std::vector<Eigen::Index>& new_ids, const TrainConfig& cfg, std::mt19937_64& rng) {
  if (new_ids.empty()) return 0;
  std::vector<Eigen::Index> pool = new_ids;
  const std::size_t replay = std::min(old_ids.size(), 4 * new_ids.size());
  if (replay > 0) {
    std::vector<Eigen::Index> sampled;
    sampled.reserve(replay);
    std::sample(old_ids.begin(), old_ids.end(), std::back_inserter(sampled), replay, rng);
    pool.insert(pool.end(), sampled.begin(), sampled.end());
  }
  return train_epochs(m, data, labels, std::move(pool), cfg.epochs_update, cfg, rng);
}

/// Checkpoint: "MLP1", u32 layer-dim count, u32 dims, then per layer the
/// row-major f32 weights followed by the f32 biases, little-endian.
std::string checkpoint_bytes(const MlpModel& m);
void save_checkpoint(const std::filesystem::path& path, const MlpModel& m);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace litho::learner
