#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "litho/error.hpp"
#include "litho/learner.hpp"
#include "litho/layout_io.hpp"

using namespace litho;
namespace ln = litho::learner;

namespace {

using Mlp = ln::BasicMlp<double>;

Eigen::MatrixXd random_inputs(int dim, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(dim, count);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

Eigen::MatrixXd random_targets(int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd t(2, count);
  for (int c = 0; c < count; ++c) {
    t(1, c) = u(rng);
    t(0, c) = 1 - t(1, c);
  }
  return t;
}

}  // namespace

TEST(Learner, SameSeedSameModel) {
  ln::TrainConfig cfg;
  const auto a = ln::init_model<float>(cfg, 50);
  const auto b = ln::init_model<float>(cfg, 50);
  EXPECT_EQ(ln::checkpoint_bytes(a), ln::checkpoint_bytes(b));
  cfg.seed = 2;
  EXPECT_NE(ln::checkpoint_bytes(a), ln::checkpoint_bytes(ln::init_model<float>(cfg, 50)));
  EXPECT_EQ(a.dims, (std::vector<int>{50, 64, 32, 2}));
}

TEST(Learner, ConfigValidation) {
  ln::TrainConfig cfg;
  cfg.sigma = 0;
  EXPECT_THROW(ln::init_model<float>(cfg, 4), Error);
  cfg = {};
  cfg.eps0 = 0.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.alpha = -1;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(ln::init_model<float>(ln::TrainConfig{}, 0), Error);
}

TEST(Learner, ZeroWeightsGiveOneHalf) {
  auto m = ln::init_model<double>(ln::TrainConfig{}, 6);
  for (auto& l : m.layers) l.weight.setZero();
  std::mt19937_64 rng(1);
  const auto p = ln::predict_proba(m, random_inputs(6, 5, rng));
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p[i], 0.5);
}

TEST(Learner, SoftmaxColumnsSumToOne) {
  std::mt19937_64 rng(2);
  ln::TrainConfig cfg;
  cfg.sigma = 1.0;
  const auto m = ln::init_model<double>(cfg, 8);
  const auto out = ln::forward(m, random_inputs(8, 20, rng)).back();
  for (Eigen::Index c = 0; c < out.cols(); ++c) EXPECT_NEAR(out.col(c).sum(), 1.0, 1e-9);
  EXPECT_THROW(ln::forward(m, random_inputs(7, 1, rng)), Error);
}

TEST(Learner, BiasTargetSchedule) {
  ln::TrainConfig cfg;
  cfg.eps0 = 0.0;
  cfg.total_bias_steps = 100;
  for (long t : {0L, 50L, 200L}) {
    const auto tg = ln::bias_target(Label::non_hotspot, t, cfg);
    EXPECT_EQ(tg.hotspot, 0.0);
    EXPECT_EQ(tg.non_hotspot, 1.0);
  }
  cfg.eps0 = 0.3;
  auto tg = ln::bias_target(Label::non_hotspot, 0, cfg);
  EXPECT_DOUBLE_EQ(tg.hotspot, 0.3);
  EXPECT_DOUBLE_EQ(tg.non_hotspot, 0.7);
  tg = ln::bias_target(Label::non_hotspot, 50, cfg);
  EXPECT_DOUBLE_EQ(tg.hotspot, 0.15);
  EXPECT_DOUBLE_EQ(tg.non_hotspot, 0.85);
  tg = ln::bias_target(Label::non_hotspot, 150, cfg);
  EXPECT_DOUBLE_EQ(tg.hotspot, 0.0);
  tg = ln::bias_target(Label::hotspot, 0, cfg);
  EXPECT_DOUBLE_EQ(tg.hotspot, 1.0);
  EXPECT_DOUBLE_EQ(tg.non_hotspot, 0.0);
}

TEST(Learner, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  ln::TrainConfig cfg;
  cfg.sigma = 0.5;
  cfg.hidden = {7, 5};
  auto m = ln::init_model<double>(cfg, 6);
  for (auto& l : m.layers) l.bias.setRandom();
  const Eigen::MatrixXd x = random_inputs(6, 9, rng);
  const Eigen::MatrixXd t = random_targets(9, rng);
  const auto grads = ln::gradient(m, x, t);
  std::uniform_int_distribution<std::size_t> layer(0, m.layers.size() - 1);
  const double h = 1e-4;
  for (int probe = 0; probe < 20; ++probe) {
    const std::size_t l = layer(rng);
    const bool bias = probe % 4 == 3;
    double* param = bias ? m.layers[l].bias.data() : m.layers[l].weight.data();
    const Eigen::Index size = bias ? m.layers[l].bias.size() : m.layers[l].weight.size();
    std::uniform_int_distribution<Eigen::Index> pick(0, size - 1);
    const Eigen::Index at = pick(rng);
    const double saved = param[at];
    param[at] = saved + h;
    const double up = ln::loss(m, x, t);
    param[at] = saved - h;
    const double down = ln::loss(m, x, t);
    param[at] = saved;
    const double numeric = (up - down) / (2 * h);
    const double analytic = bias ? grads[l].bias.data()[at] : grads[l].weight.data()[at];
    const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    EXPECT_LT(rel, 1e-4) << "layer " << l << " index " << at << " analytic " << analytic << " numeric " << numeric;
  }
}

TEST(Learner, FixedPointLeavesWeightsUnchanged) {
  std::mt19937_64 rng(3);
  auto m = ln::init_model<double>(ln::TrainConfig{}, 5);
  const Eigen::MatrixXd x = random_inputs(5, 4, rng);
  const Eigen::MatrixXd targets = ln::forward(m, x).back();
  const auto before = m.layers;
  ln::descent_step(m, x, targets, 0.1);
  for (std::size_t l = 0; l < before.size(); ++l) {
    EXPECT_LT((m.layers[l].weight - before[l].weight).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((m.layers[l].bias - before[l].bias).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(m.step, 1);
}

TEST(Learner, SingleExampleLossDecreases) {
  std::mt19937_64 rng(4);
  ln::TrainConfig cfg;
  cfg.alpha = 0.01;
  cfg.eps0 = 0.0;
  auto m = ln::init_model<double>(cfg, 10);
  const Eigen::MatrixXd x = random_inputs(10, 1, rng);
  const std::vector<Label> y{Label::hotspot};
  double prev = ln::loss(m, x, ln::target_matrix<double>(y, 0, cfg));
  for (int step = 1; step <= 1000; ++step) {
    ln::train_step(m, x, y, cfg);
    const double now = ln::loss(m, x, ln::target_matrix<double>(y, 0, cfg));
    if (step > 10) {
      ASSERT_LE(now, prev + 1e-15) << step;
    }
    prev = now;
  }
  EXPECT_LT(prev, 0.1);
}

TEST(Learner, NonFiniteGradientIsATrainingError) {
  auto m = ln::init_model<double>(ln::TrainConfig{}, 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    ln::descent_step(m, x, Eigen::MatrixXd::Constant(2, 2, 0.5), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::training);
  }
}

TEST(Learner, IncrementalUpdateWithEmptyBatchIsNoop) {
  std::mt19937_64 rng(5);
  auto m = ln::init_model<float>(ln::TrainConfig{}, 4);
  const Eigen::MatrixXf data = Eigen::MatrixXf::Random(4, 10);
  const std::vector<Label> labels(10, Label::non_hotspot);
  const auto before = ln::checkpoint_bytes(m);
  EXPECT_EQ(ln::incremental_update(m, data, labels, {0, 1, 2}, {}, ln::TrainConfig{}, rng), 0);
  EXPECT_EQ(ln::checkpoint_bytes(m), before);
}

TEST(Learner, IncrementalUpdateReplaysBoundedHistory) {
  std::mt19937_64 rng(6);
  ln::TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs_update = 2;
  auto m = ln::init_model<float>(cfg, 4);
  const Eigen::MatrixXf data = Eigen::MatrixXf::Random(4, 40);
  const std::vector<Label> labels(40, Label::non_hotspot);
  std::vector<Eigen::Index> old_ids(30);
  std::iota(old_ids.begin(), old_ids.end(), 0);
  // 2 new + min(30, 8) replayed = 10 examples, 3 batches per epoch
  EXPECT_EQ(ln::incremental_update(m, data, labels, old_ids, {35, 36}, cfg, rng), 6);
  EXPECT_EQ(m.step, 6);
}

TEST(Learner, StepsForMatchesTrainEpochs) {
  std::mt19937_64 rng(1);
  ln::TrainConfig cfg;
  cfg.batch_size = 7;
  cfg.epochs_initial = 3;
  auto m = ln::init_model<float>(cfg, 4);
  const Eigen::MatrixXf data = Eigen::MatrixXf::Random(4, 20);
  std::vector<Label> labels(20, Label::non_hotspot);
  labels[3] = Label::hotspot;
  std::vector<Eigen::Index> ids(20);
  std::iota(ids.begin(), ids.end(), 0);
  EXPECT_EQ(ln::train_initial(m, data, labels, ids, cfg, rng), ln::steps_for(20, 3, cfg));
  EXPECT_EQ(m.bias_horizon, 9);
}

TEST(Learner, EmbeddingsAreUnitAndDeterministic) {
  std::mt19937_64 rng(8);
  const auto m = ln::init_model<float>(ln::TrainConfig{}, 12);
  Eigen::MatrixXf x = Eigen::MatrixXf::Random(12, 3);
  x.col(2) = x.col(0);
  const auto e = ln::embed(m, x);
  EXPECT_EQ(e.rows(), 32);
  EXPECT_TRUE(e.col(0) == e.col(2));
  for (Eigen::Index c = 0; c < e.cols(); ++c) {
    const float n = e.col(c).norm();
    EXPECT_TRUE(n == 0.0f || std::abs(n - 1.0f) < 1e-5f);
  }
}

TEST(Learner, CheckpointRoundTrip) {
  const auto m = ln::init_model<float>(ln::TrainConfig{}, 9);
  const auto path = std::filesystem::temp_directory_path() / "litho_model_test.ckpt";
  ln::save_checkpoint(path, m);
  const auto back = ln::load_checkpoint(path);
  EXPECT_EQ(back.dims, m.dims);
  EXPECT_EQ(ln::checkpoint_bytes(back), ln::checkpoint_bytes(m));
  EXPECT_EQ(read_text(path).substr(0, 4), "MLP1");
  write_atomic(path, "MLP1\x02");
  EXPECT_THROW(ln::load_checkpoint(path), Error);
  std::filesystem::remove(path);
}
