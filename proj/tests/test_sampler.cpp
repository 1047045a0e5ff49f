#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "litho/error.hpp"
#include "litho/sampler.hpp"
#include "oracles.hpp"

using namespace litho;
using namespace litho::sampler;

namespace {

class TableOracle final : public LabelOracle {
 public:
  explicit TableOracle(std::vector<Label> labels) : labels_(std::move(labels)) {}
  Label query(ClipId id) override {
    if (seen_.insert(id).second) ++queries_;
    return labels_.at(static_cast<std::size_t>(id));
  }
  long litho_count() const override { return queries_; }

 private:
  std::vector<Label> labels_;
  std::set<ClipId> seen_;
  long queries_ = 0;
};

ClipDataset identical_dataset(int n, int dim) {
  ClipDataset d;
  for (int i = 0; i < n; ++i) d.ids.push_back(i);
  d.inputs = Eigen::MatrixXf::Constant(dim, n, 0.3f);
  d.init_vectors = Eigen::MatrixXd::Constant(4, n, 0.5);
  return d;
}

learner::TrainConfig small_train() {
  learner::TrainConfig t;
  t.hidden = {8, 4};
  t.epochs_initial = 2;
  t.epochs_update = 1;
  return t;
}

}  // namespace

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k = 91;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.pool_cap = 10;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.k = 45;
  EXPECT_TRUE(c.near_half_ratio());
  c.k = 60;
  EXPECT_FALSE(c.near_half_ratio());
}

TEST(TopScored, TiesReturnLowestIds) {
  const std::vector<Eigen::Index> pool{9, 3, 7, 1, 5};
  const std::vector<float> scores(5, 0.5f);
  EXPECT_EQ(top_scored(pool, scores, 3), (std::vector<Eigen::Index>{1, 3, 5}));
  EXPECT_EQ(top_scored(pool, scores, 10).size(), 5u);
}

TEST(UncertaintyFilter, SymmetricModelPicksLowestIds) {
  auto m = learner::init_model<float>(learner::TrainConfig{}, 3);
  for (auto& l : m.layers) l.weight.setZero();
  const Eigen::MatrixXf inputs = Eigen::MatrixXf::Random(3, 20);
  std::vector<Eigen::Index> pool;
  for (Eigen::Index i = 19; i >= 4; --i) pool.push_back(i);
  SamplerConfig cfg;
  cfg.pool_cap.reset();
  std::mt19937_64 rng(1);
  EXPECT_EQ(uncertainty_filter(m, inputs, pool, 5, cfg, rng), (std::vector<Eigen::Index>{4, 5, 6, 7, 8}));
  const std::vector<Eigen::Index> small{2, 11};
  EXPECT_EQ(uncertainty_filter(m, inputs, small, 5, cfg, rng).size(), 2u);
}

TEST(UncertaintyFilter, ObviousHotspotsSurvive) {
  // a model whose hotspot logit is 10 * x0: inputs with x0 = 1 score > 0.9
  learner::TrainConfig t;
  t.hidden = {1};
  auto m = learner::init_model<float>(t, 3);
  m.layers[0].weight << 1, 0, 0;
  m.layers[1].weight << 0, 10;
  Eigen::MatrixXf inputs = Eigen::MatrixXf::Zero(3, 200);
  std::mt19937_64 rng(2);
  std::vector<Eigen::Index> hot(10);
  std::iota(hot.begin(), hot.end(), 0);
  std::shuffle(hot.begin(), hot.end(), rng);
  for (auto& h : hot) h = h * 17 + 3;
  for (const auto h : hot) inputs(0, h) = 1;
  std::vector<Eigen::Index> pool(200);
  std::iota(pool.begin(), pool.end(), 0);
  SamplerConfig cfg;
  cfg.pool_cap.reset();
  const auto picked = uncertainty_filter(m, inputs, pool, 15, cfg, rng);
  for (const auto h : hot) {
    EXPECT_GT(learner::predict_proba(m, Eigen::VectorXf(inputs.col(h))), 0.9f);
    EXPECT_NE(std::find(picked.begin(), picked.end(), h), picked.end()) << h;
  }
}

TEST(SelectInitial, IdenticalClipsGiveLowestIds) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(4, 12, 0.5);
  EXPECT_EQ(select_initial(v, 3, SamplerConfig{}, rng), (std::vector<Eigen::Index>{0, 1, 2}));
}

TEST(SelectInitial, WholeSetWhenBudgetCoversIt) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Random(4, 7);
  EXPECT_EQ(select_initial(v, 7, SamplerConfig{}, rng), (std::vector<Eigen::Index>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(select_initial(v, 8, SamplerConfig{}, rng), Error);
}

TEST(SelectInitial, OnePerCluster) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0, 0.05);
  Eigen::MatrixXd v(3, 10);
  for (int j = 0; j < 10; ++j) {
    v.col(j) = j < 6 ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 1, 0);
    for (int i = 0; i < 3; ++i) v(i, j) += noise(rng);
    v.col(j).normalize();
  }
  const auto picked = select_initial(v, 2, SamplerConfig{}, rng);
  ASSERT_EQ(picked.size(), 2u);
  EXPECT_LT(picked[0], 6);
  EXPECT_GE(picked[1], 6);
  const Eigen::MatrixXd d = build_diversity(v);
  const double f = d(picked[0], picked[0]) + d(picked[1], picked[1]) + 2 * d(picked[0], picked[1]);
  EXPECT_LE(f, oracle::binary_min(d, 2) + 0.05);
}

TEST(SelectBatch, CertificateIsReported) {
  std::mt19937_64 rng(6);
  Eigen::MatrixXd v(5, 30);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
  v.colwise().normalize();
  const auto c = select_batch(v, 10, SamplerConfig{});
  EXPECT_EQ(c.picked.size(), 10u);
  EXPECT_TRUE(std::is_sorted(c.picked.begin(), c.picked.end()));
  EXPECT_LE(c.rounded.relaxed_objective, c.rounded.objective_int + 1e-6 * c.rounded.gap_bound);
  EXPECT_LE(c.rounded.objective_int, c.rounded.gap_bound * (1 + 1e-6));
  EXPECT_NEAR(c.rounded.lambda_max, oracle::eig_max(build_diversity(v)), 1e-6);
}

TEST(ActiveSampling, EmptyPoolRunsNoIterations) {
  const auto data = identical_dataset(5, 6);
  TableOracle oracle(std::vector<Label>(5, Label::non_hotspot));
  SamplerConfig cfg;
  cfg.k = 5;
  cfg.n_query = 10;
  const auto r = batch_active_sampling(data, oracle, small_train(), cfg);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.labeled.size(), 5u);
  EXPECT_EQ(oracle.litho_count(), 5);
}

TEST(ActiveSampling, LoopArithmeticOnIdenticalClips) {
  const int total = 103, k = 4, n = 10, k0 = 6;
  const auto data = identical_dataset(total, 6);
  TableOracle oracle(std::vector<Label>(total, Label::non_hotspot));
  SamplerConfig cfg;
  cfg.k = k;
  cfg.n_query = n;
  cfg.initial_size = k0;
  int hooked = 0;
  const auto r = batch_active_sampling(data, oracle, small_train(), cfg,
                                       [&](const IterationRecord& rec, const SamplingResult& state) {
                                         ++hooked;
                                         EXPECT_EQ(rec.iteration, hooked);
                                         EXPECT_EQ(rec.litho_total, static_cast<long>(state.labeled.size()));
                                       });
  const int unlabeled = total - k0;
  const int iterations = (unlabeled + n - 1) / n;
  EXPECT_EQ(static_cast<int>(r.log.size()), iterations);
  EXPECT_EQ(hooked, iterations);
  // the last query set holds 7 clips, of which k are labeled
  EXPECT_EQ(oracle.litho_count(), k0 + k * iterations);
  EXPECT_EQ(r.labeled.size() + r.discarded.size(), static_cast<std::size_t>(total));
  std::set<Eigen::Index> all(r.labeled.begin(), r.labeled.end());
  all.insert(r.discarded.begin(), r.discarded.end());
  EXPECT_EQ(all.size(), static_cast<std::size_t>(total));
}

TEST(ActiveSampling, SeedReplayIsIdentical) {
  std::mt19937_64 rng(7);
  ClipDataset d;
  const int total = 80;
  std::vector<Label> truth;
  d.inputs = Eigen::MatrixXf::Random(6, total);
  d.init_vectors = Eigen::MatrixXd::Random(4, total);
  d.init_vectors.colwise().normalize();
  for (int i = 0; i < total; ++i) {
    d.ids.push_back(i);
    truth.push_back(d.inputs(0, i) > 0.6f ? Label::hotspot : Label::non_hotspot);
  }
  SamplerConfig cfg;
  cfg.k = 5;
  cfg.n_query = 12;
  TableOracle a(truth), b(truth);
  const auto ra = batch_active_sampling(d, a, small_train(), cfg);
  const auto rb = batch_active_sampling(d, b, small_train(), cfg);
  EXPECT_EQ(ra.labeled, rb.labeled);
  EXPECT_EQ(ra.discarded, rb.discarded);
  EXPECT_EQ(learner::checkpoint_bytes(ra.model), learner::checkpoint_bytes(rb.model));
  for (const auto& rec : ra.log) {
    EXPECT_LE(rec.f_rounded, rec.gap_bound * (1 + 1e-6));
  }
}
