// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vafx/error.hpp"
#include "vafx/training.hpp"

namespace vafx {
namespace {

class PerArch : public ::testing::TestWithParam<Architecture> {};

std::string arch_name(const ::testing::TestParamInfo<Architecture>& info) {
  return std::string(to_string(info.param));
}

TEST(LossMse, Examples) {
  EXPECT_EQ(loss_mse(Vector{0.3, -0.2}, Vector{0.3, -0.2}), 0.0);
  EXPECT_DOUBLE_EQ(loss_mse(Vector{1, 0}, Vector{0, 0}), 0.5);
  EXPECT_THROW(loss_mse(Vector{}, Vector{}), InputError);
  EXPECT_THROW(loss_mse(Vector{1}, Vector{1, 2}), InputError);
}

TEST(LossMse, Homogeneity) {
  std::mt19937_64 rng(1);
  const oracle::Vec a = oracle::random_vector(rng, 100), b = oracle::random_vector(rng, 100);
  oracle::Vec a3 = a, b3 = b;
  for (double& v : a3) v *= 3.0;
  for (double& v : b3) v *= 3.0;
  EXPECT_NEAR(loss_mse(a3, b3), 9.0 * loss_mse(a, b), 1e-12);
}

GradientSet filled(const ParamSet& layout, double v) {
  GradientSet g = layout.zeros_like();
  g.fill(v);
  return g;
}

TEST(Clip, BelowThresholdUnchanged) {
  ParamSet ps;
  ps.add("w", {4});
  GradientSet g = ps.zeros_like();
  g.at("w").values = {0.25, 0.25, 0.25, 0.25};
  EXPECT_NEAR(clip_grad_norm(g, 1.0), 0.5, 1e-15);
  EXPECT_EQ(g.at("w").values, (Vector{0.25, 0.25, 0.25, 0.25}));
}

TEST(Clip, AboveThresholdScaled) {
  ParamSet ps;
  ps.add("w", {4});
  GradientSet g = ps.zeros_like();
  g.at("w").values = {1.0, 1.0, 1.0, 1.0};
  EXPECT_NEAR(clip_grad_norm(g, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(global_norm(g), 1.0, 1e-12);
  EXPECT_NEAR(g.at("w").values[0], 0.5, 1e-15);
}

TEST(Clip, ZeroGradientsUnchanged) {
  ParamSet ps;
  ps.add("w", {3});
  GradientSet g = ps.zeros_like();
  clip_grad_norm(g, 1.0);
  EXPECT_EQ(g.at("w").values, Vector(3, 0.0));
}

TEST(Clip, PostClipNormNeverExceedsLimit) {
  std::mt19937_64 rng(2);
  const ParamSet layout = make_param_layout(ModelConfig{Architecture::kS6, 2, 48000.0, {}});
  for (int t = 0; t < 200; ++t) {
    GradientSet g = layout.zeros_like();
    const double scale = std::pow(10.0, static_cast<double>(rng() % 9) - 4.0);
    for (Tensor& x : g) x.values = oracle::random_vector(rng, x.size(), scale);
    clip_grad_norm(g, 1.0);
    ASSERT_LE(global_norm(g), 1.0 + 1e-12);
  }
}

TEST(LrSchedule, StagedDefault) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 0), 3e-4);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 49), 3e-4);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 50), 7.5e-5);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 100), 1.875e-5);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 199), 3e-4 * std::pow(0.25, 3));
}

TEST(LrSchedule, LiteralReading) {
  TrainConfig cfg;
  cfg.schedule = LrSchedule::kLiteral;
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 0), 3e-4);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 1), 7.5e-5);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 2), 1.875e-5);
  EXPECT_EQ(parse_lr_schedule(to_string(LrSchedule::kLiteral)), LrSchedule::kLiteral);
  EXPECT_THROW(parse_lr_schedule("cosine"), InputError);
}

TEST(TrainConfigTest, DefaultsAndValidation) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.max_epochs, 200u);
  EXPECT_EQ(cfg.patience, 10u);
  EXPECT_EQ(cfg.segment_len, 2400u);
  EXPECT_EQ(cfg.clip_norm, 1.0);
  EXPECT_EQ(cfg.batch_size, 32u);
  EXPECT_NO_THROW(cfg.validate());
  cfg.initial_lr = -1.0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Adam, ZeroGradientLeavesWeights) {
  ParamSet w;
  w.add("x", {3});
  w.at("x").values = {1.0, -2.0, 0.5};
  AdamState st = make_adam_state(w);
  adam_update(w, filled(w, 0.0), st, 1e-3);
  EXPECT_EQ(w.at("x").values, (Vector{1.0, -2.0, 0.5}));
}

TEST(Adam, FirstStepIsMinusLr) {
  ParamSet w;
  w.add("x", {1});
  AdamState st = make_adam_state(w);
  adam_update(w, filled(w, 1.0), st, 3e-4);
  EXPECT_NEAR(w.at("x").values[0], -3e-4, 1e-6 * 3e-4 + 1e-12);
  EXPECT_EQ(st.t, 1u);
}

TEST(Adam, MatchesHandWrittenRecursion) {
  ParamSet w;
  w.add("x", {1});
  AdamState st = make_adam_state(w);
  double x = 0.0, m = 0.0, v = 0.0;
  const double lr = 1e-2;
  for (int t = 1; t <= 20; ++t) {
    const double g = std::sin(t);
    GradientSet gs = filled(w, g);
    adam_update(w, gs, st, lr);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t)), vh = v / (1.0 - std::pow(0.999, t));
    x -= lr * mh / (std::sqrt(vh) + 1e-8);
    ASSERT_NEAR(w.at("x").values[0], x, 1e-14);
  }
}

// --- gradients ---

TEST_P(PerArch, FiniteDifferenceAudit) {
  std::mt19937_64 rng(3);
  const Model m = fixtures::random_model(GetParam(), 2, 4);
  RecurrentState st = m.initial_state();
  m.forward_segment(st, oracle::random_vector(rng, 100, 0.5), Vector{0.3, 0.7});
  const oracle::Vec x = oracle::random_vector(rng, 64, 0.5), y = oracle::random_vector(rng, 64, 0.5);
  const AuditResult r = finite_difference_audit(m, st, x, y, Vector{0.3, 0.7});
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_tensor << "[" << r.worst_index << "] analytic " << r.analytic
                                   << " numeric " << r.numeric;
  EXPECT_EQ(r.checked, m.count_params());
}

TEST_P(PerArch, ZeroWeightGradientOnlyOnOutputPath) {
  Model m(ModelConfig{GetParam(), 2, 48000.0, {}});
  m.mutable_params().at("out.b").values[0] = 0.3;
  m.refresh();
  std::mt19937_64 rng(5);
  const oracle::Vec x = oracle::random_vector(rng, 64);
  const SegmentGradient g = backward_segment(m, m.initial_state(), x, Vector(64, 0.0), Vector{0.5, 0.5});
  EXPECT_NEAR(g.loss, 0.09, 1e-15);
  for (const Tensor& t : g.grads) {
    if (t.name == "out.b") {
      EXPECT_NEAR(t.values[0], 2.0 * 0.3, 1e-14);
    } else if (t.name != "glu.W" && t.name != "glu.b" && t.name != "out.W") {
      for (double v : t.values) EXPECT_EQ(v, 0.0) << t.name;
    }
  }
}

TEST_P(PerArch, ZeroWeightAuditIsExact) {
  Model m(ModelConfig{GetParam(), 1, 48000.0, {}});
  m.mutable_params().at("out.b").values[0] = 0.1;
  m.refresh();
  std::mt19937_64 rng(6);
  const oracle::Vec x = oracle::random_vector(rng, 64), y = oracle::random_vector(rng, 64);
  EXPECT_LT(finite_difference_audit(m, m.initial_state(), x, y, Vector{0.4}).max_rel_error, 1e-6);
}

TEST_P(PerArch, TruncationIsExact) {
  const Model m = fixtures::random_model(GetParam(), 1, 7);
  std::mt19937_64 rng(8);
  const oracle::Vec x = oracle::random_vector(rng, 200), y = oracle::random_vector(rng, 200);
  const Vector p{0.6};
  const std::span<const double> xs(x), ys(y);
  const SegmentGradient first = backward_segment(m, m.initial_state(), xs.first(120), ys.first(120), p);
  const SegmentGradient second = backward_segment(m, first.state, xs.subspan(120), ys.subspan(120), p);
  // Same segments computed again independently from the same carried states.
  const SegmentGradient first_again = backward_segment(m, m.initial_state(), xs.first(120), ys.first(120), p);
  const SegmentGradient second_again = backward_segment(m, first_again.state, xs.subspan(120), ys.subspan(120), p);
  for (std::size_t i = 0; i < first.grads.size(); ++i) {
    EXPECT_EQ(first.grads[i].values, first_again.grads[i].values);
    EXPECT_EQ(second.grads[i].values, second_again.grads[i].values);
  }
  // Carried state equals the forward pass state.
  RecurrentState st = m.initial_state();
  const Vector y_fwd = m.forward_segment(st, xs.first(120), p);
  EXPECT_EQ(st.history, first.state.history);
  EXPECT_NEAR(first.loss, loss_mse(ys.first(120), y_fwd), 1e-15);
}

TEST(Audit, SmallerStepStaysAccurate) {
  std::mt19937_64 rng(9);
  const Model m = fixtures::random_model(Architecture::kLru, 2, 10);
  const oracle::Vec x = oracle::random_vector(rng, 64, 0.5), y = oracle::random_vector(rng, 64, 0.5);
  const double e1 = finite_difference_audit(m, m.initial_state(), x, y, Vector{0.5, 0.5}, 1e-6).max_rel_error;
  const double e2 = finite_difference_audit(m, m.initial_state(), x, y, Vector{0.5, 0.5}, 5e-7).max_rel_error;
  EXPECT_LT(e1, 1e-4);
  EXPECT_LT(e2, 1e-4);
}

// --- training loop ---

TrainingData tiny_identity(std::mt19937_64& rng, std::vector<oracle::Vec>& store) {
  store.clear();
  for (int i = 0; i < 3; ++i) store.push_back(oracle::random_vector(rng, 6000, 0.5));
  TrainingData d;
  d.train.push_back({store[0], store[0], {}, "a"});
  d.train.push_back({store[1], store[1], {}, "b"});
  d.validation.push_back({store[2], store[2], {}, "v"});
  return d;
}

TEST(Train, PatienceZeroStopsAtFirstNonImprovement) {
  std::mt19937_64 rng(11);
  std::vector<oracle::Vec> store;
  const TrainingData d = tiny_identity(rng, store);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.patience = 0;
  cfg.initial_lr = 0.05;  // large enough to oscillate
  const TrainResult r = train(Model::initialized(ModelConfig{Architecture::kLstm, 0, 48000.0, {}}, {}), d, cfg);
  ASSERT_GE(r.history.epochs_run, 1u);
  const auto& v = r.history.val_loss;
  for (std::size_t e = 1; e + 1 < v.size(); ++e) EXPECT_LT(v[e], *std::min_element(v.begin(), v.begin() + e));
  if (r.history.epochs_run < cfg.max_epochs && !r.history.diverged) {
    EXPECT_TRUE(r.history.early_stopped);
    EXPECT_GE(v.back(), *std::min_element(v.begin(), v.end() - 1));
  }
}

TEST(Train, DeterministicUnderSeed) {
  std::mt19937_64 rng(12);
  std::vector<oracle::Vec> store;
  const TrainingData d = tiny_identity(rng, store);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 77;
  const ModelConfig mc{Architecture::kS4d, 0, 48000.0, {}};
  const TrainResult a = train(Model::initialized(mc, {}), d, cfg);
  const TrainResult b = train(Model::initialized(mc, {}), d, cfg);
  EXPECT_EQ(a.history.train_loss, b.history.train_loss);
  EXPECT_EQ(a.history.val_loss, b.history.val_loss);
  EXPECT_EQ(a.history.lr.size(), 3u);
}

TEST(Train, BestEpochIsArgminValidation) {
  std::mt19937_64 rng(13);
  std::vector<oracle::Vec> store;
  const TrainingData d = tiny_identity(rng, store);
  TrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.initial_lr = 3e-3;
  const TrainResult r = train(Model::initialized(ModelConfig{Architecture::kLstm, 0, 48000.0, {}}, {}), d, cfg);
  const auto& v = r.history.val_loss;
  EXPECT_EQ(r.history.best_epoch, static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin()));
  EXPECT_NEAR(evaluate_loss(r.model, d.validation), v[r.history.best_epoch], 1e-12);
}

TEST(Train, IdentityLossFallsBelowTenPercent) {
  std::mt19937_64 rng(14);
  std::vector<oracle::Vec> store;
  const TrainingData d = tiny_identity(rng, store);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.initial_lr = 3e-3;
  cfg.segment_len = 600;
  const TrainResult r = train(Model::initialized(ModelConfig{Architecture::kLstm, 0, 48000.0, {}}, {}), d, cfg);
  const auto& v = r.history.val_loss;
  EXPECT_LT(*std::min_element(v.begin(), v.end()), 0.1 * v.front());
}

TEST(Train, ParameterCountMismatchRejected) {
  std::mt19937_64 rng(15);
  std::vector<oracle::Vec> store;
  const TrainingData d = tiny_identity(rng, store);
  EXPECT_THROW(train(Model(ModelConfig{Architecture::kLstm, 2, 48000.0, {}}), d, TrainConfig{}), CompatibilityError);
}

TEST(Train, DivergenceRestoresBestWeights) {
  std::mt19937_64 rng(16);
  std::vector<oracle::Vec> store;
  TrainingData d = tiny_identity(rng, store);
  store[0][3000] = 1e300;  // poisons the training loss in the first epoch
  TrainConfig cfg;
  cfg.max_epochs = 3;
  const Model init = Model::initialized(ModelConfig{Architecture::kLstm, 0, 48000.0, {}}, {});
  const TrainResult r = train(init, d, cfg);
  EXPECT_TRUE(r.history.diverged);
  EXPECT_FALSE(r.history.message.empty());
  for (std::size_t i = 0; i < init.params().size(); ++i) {
    EXPECT_EQ(r.model.params()[i].values, init.params()[i].values);
  }
}

INSTANTIATE_TEST_SUITE_P(AllArchitectures, PerArch, ::testing::ValuesIn(kAllArchitectures), arch_name);

}  // namespace
}  // namespace vafx
