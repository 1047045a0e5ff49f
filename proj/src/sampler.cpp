#include "litho/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace litho::sampler {

void SamplerConfig::validate() const {
  if (n_query <= 0 || k <= 0) throw Error(ErrorKind::config, "sampler", "SamplerConfig", "n and k must be positive");
  if (k > n_query) {
    throw Error(ErrorKind::config, "sampler", "SamplerConfig",
                "k (" + std::to_string(k) + ") must not exceed n (" + std::to_string(n_query) + ")");
  }
  if (pool_cap && *pool_cap < n_query) {
    throw Error(ErrorKind::config, "sampler", "SamplerConfig", "pool cap must be at least n");
  }
  if (!(qp_tol > 0.0) || qp_max_iters <= 0) {
    throw Error(ErrorKind::config, "sampler", "SamplerConfig", "qp_tol and qp_max_iters must be positive");
  }
  if (initial_size < 0) throw Error(ErrorKind::config, "sampler", "SamplerConfig", "initial size must be >= 0");
}

bool SamplerConfig::near_half_ratio() const {
  return std::abs(static_cast<double>(k) / static_cast<double>(n_query) - 0.5) < 0.05;
}

BatchChoice select_batch(const Eigen::MatrixXd& vectors, int k, const SamplerConfig& cfg) {
  BatchChoice choice;
  const Eigen::Index n = vectors.cols();
  if (k >= n) {
    choice.picked.resize(static_cast<std::size_t>(n));
    std::iota(choice.picked.begin(), choice.picked.end(), Eigen::Index{0});
    const Eigen::MatrixXd d = build_diversity(vectors);
    const double f = d.sum();
    choice.rounded.objective_int = f;
    choice.rounded.relaxed_objective = f;
    choice.rounded.lambda_max = largest_eigenvalue(d);
    choice.rounded.gap_bound = 2.0 * f;
    return choice;
  }
  const Eigen::MatrixXd d = build_diversity(vectors);
  const auto sol = solve_relaxed(d, k, cfg.qp());
  choice.rounded = round_topk(d, sol, k);
  choice.picked = choice.rounded.indices;
  choice.qp_iterations = sol.iterations;
  return choice;
}

std::vector<Eigen::Index> top_scored(std::span<const Eigen::Index> pool, std::span<const float> scores, int n_query) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return pool[a] < pool[b];
  });
  order.resize(std::min(order.size(), static_cast<std::size_t>(std::max(0, n_query))));
  std::vector<Eigen::Index> out;
  out.reserve(order.size());
  for (const auto i : order) out.push_back(pool[i]);
  return out;
}

std::vector<Eigen::Index> uncertainty_filter(const learner::MlpModel& model, const Eigen::MatrixXf& inputs,
                                             std::span<const Eigen::Index> pool, int n_query,
                                             const SamplerConfig& cfg, std::mt19937_64& rng) {
  std::vector<Eigen::Index> candidates(pool.begin(), pool.end());
  if (cfg.pool_cap && candidates.size() > static_cast<std::size_t>(*cfg.pool_cap)) {
    std::vector<Eigen::Index> sampled;
    sampled.reserve(static_cast<std::size_t>(*cfg.pool_cap));
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(sampled), *cfg.pool_cap, rng);
    candidates = std::move(sampled);
  }
  if (candidates.empty()) return {};
  Eigen::MatrixXf x(inputs.rows(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = inputs.col(candidates[i]);
  const Eigen::VectorXf p = learner::predict_proba(model, x);
  return top_scored(candidates, std::span<const float>(p.data(), static_cast<std::size_t>(p.size())), n_query);
}

std::vector<Eigen::Index> select_initial(const Eigen::MatrixXd& init_vectors, int k0, const SamplerConfig& cfg,
                                         std::mt19937_64& rng) {
  const Eigen::Index total = init_vectors.cols();
  if (k0 < 0 || k0 > total) {
    throw Error(ErrorKind::config, "sampler", "select_initial", "initial size exceeds the clip count");
  }
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(total));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  if (cfg.pool_cap && total > *cfg.pool_cap && k0 <= *cfg.pool_cap) {
    std::vector<Eigen::Index> sampled;
    std::sample(pool.begin(), pool.end(), std::back_inserter(sampled), *cfg.pool_cap, rng);
    pool = std::move(sampled);
  }
  Eigen::MatrixXd vectors(init_vectors.rows(), static_cast<Eigen::Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) vectors.col(static_cast<Eigen::Index>(i)) = init_vectors.col(pool[i]);
  const BatchChoice choice = select_batch(vectors, k0, cfg);
  std::vector<Eigen::Index> out;
  out.reserve(choice.picked.size());
  for (const auto i : choice.picked) out.push_back(pool[static_cast<std::size_t>(i)]);
  std::sort(out.begin(), out.end());
  return out;
}

SamplingResult batch_active_sampling(const ClipDataset& data, LabelOracle& oracle,
                                     const learner::TrainConfig& tcfg, const SamplerConfig& scfg,
                                     const IterationHook& hook) {
  scfg.validate();
  tcfg.validate();
  const Eigen::Index total = data.size();
  if (data.inputs.cols() != total || data.init_vectors.cols() != total) {
    throw Error(ErrorKind::config, "sampler", "batch_active_sampling", "dataset columns do not match ids");
  }
  std::mt19937_64 rng(scfg.seed);

  SamplingResult result;
  result.model = learner::init_model<float>(tcfg, static_cast<int>(data.inputs.rows()));
  result.labels.assign(static_cast<std::size_t>(total), Label::non_hotspot);

  auto label_columns = [&](const std::vector<Eigen::Index>& cols) {
    for (const auto c : cols) result.labels[static_cast<std::size_t>(c)] = oracle.query(data.ids[static_cast<std::size_t>(c)]);
  };

  const int k0 = std::min<int>(scfg.initial_size > 0 ? scfg.initial_size : scfg.k, static_cast<int>(total));
  result.labeled = select_initial(data.init_vectors, k0, scfg, rng);
  label_columns(result.labeled);

  std::vector<char> in_pool(static_cast<std::size_t>(total), 1);
  for (const auto c : result.labeled) in_pool[static_cast<std::size_t>(c)] = 0;
  std::vector<Eigen::Index> pool;
  for (Eigen::Index c = 0; c < total; ++c) {
    if (in_pool[static_cast<std::size_t>(c)]) pool.push_back(c);
  }

  result.train_steps += learner::train_initial(result.model, data.inputs, result.labels, result.labeled, tcfg, rng);
  result.examples_trained += static_cast<long>(result.labeled.size()) * tcfg.epochs_initial;

  int iteration = 0;
  while (!pool.empty()) {
    ++iteration;
    const auto query = uncertainty_filter(result.model, data.inputs, pool, scfg.n_query, scfg, rng);
    std::vector<char> queried(static_cast<std::size_t>(total), 0);
    for (const auto c : query) queried[static_cast<std::size_t>(c)] = 1;
    std::erase_if(pool, [&](Eigen::Index c) { return queried[static_cast<std::size_t>(c)] != 0; });

    // diversity over the penultimate-layer embeddings of the query set
    Eigen::MatrixXf x(data.inputs.rows(), static_cast<Eigen::Index>(query.size()));
    for (std::size_t i = 0; i < query.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = data.inputs.col(query[i]);
    const Eigen::MatrixXd emb = learner::embed(result.model, x).cast<double>();
    const BatchChoice choice = select_batch(emb, scfg.k, scfg);

    std::vector<Eigen::Index> batch;
    std::vector<char> picked(query.size(), 0);
    for (const auto i : choice.picked) {
      picked[static_cast<std::size_t>(i)] = 1;
      batch.push_back(query[static_cast<std::size_t>(i)]);
    }
    for (std::size_t i = 0; i < query.size(); ++i) {
      if (!picked[i]) result.discarded.push_back(query[i]);
    }
    label_columns(batch);

    const long steps = learner::incremental_update(result.model, data.inputs, result.labels, result.labeled, batch,
                                                   tcfg, rng);
    result.train_steps += steps;
    result.examples_trained +=
        static_cast<long>(batch.size() + std::min(result.labeled.size(), 4 * batch.size())) * tcfg.epochs_update;
    result.labeled.insert(result.labeled.end(), batch.begin(), batch.end());

    if (static_cast<Eigen::Index>(result.labeled.size() + result.discarded.size() + pool.size()) != total) {
      throw Error(ErrorKind::internal, "sampler", "batch_active_sampling", "clip conservation violated");
    }

    IterationRecord rec;
    rec.iteration = iteration;
    for (const auto c : batch) rec.selected_ids.push_back(data.ids[static_cast<std::size_t>(c)]);
    rec.f_relaxed = choice.rounded.relaxed_objective;
    rec.f_rounded = choice.rounded.objective_int;
    rec.lambda_max = choice.rounded.lambda_max;
    rec.gap_bound = choice.rounded.gap_bound;
    rec.litho_total = oracle.litho_count();
    result.log.push_back(std::move(rec));
    if (hook) hook(result.log.back(), result);
  }
  std::sort(result.discarded.begin(), result.discarded.end());
  return result;
}

}  // namespace litho::sampler
