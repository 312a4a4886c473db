#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "phaselab/error.hpp"
#include "phaselab/protocol.hpp"
#include "phaselab/results.hpp"
#include "phaselab/train.hpp"

namespace {

using namespace phaselab;
using namespace phaselab::fewshot;

DatasetSpec small_data() {
  DatasetSpec d;
  d.d = 16;
  d.n_train = 48;
  d.n_test = 200;
  d.tone_indices = {2, 5};
  d.noise_sigma = 0.8;
  return d;
}

TrialConfig small_trial(const adapters::Variant& v = adapters::Variant::lora(), int r = 4) {
  TrialConfig c;
  c.adapter.variant = v;
  c.adapter.r = r;
  c.training.epochs = 5;
  c.training.learning_rate = 5e-3;
  c.backbone_seed = 3;
  return c;
}

ProtocolConfig small_protocol(const adapters::Variant& v = adapters::Variant::lora()) {
  ProtocolConfig p;
  p.data.synthetic = small_data();
  p.trial = small_trial(v);
  p.seeds = {0, 1, 2};
  return p;
}

TEST(Train, ZeroEpochsIsChanceLevelOnAverage) {
  DatasetSpec spec = small_data();
  spec.noise_sigma = 3.0;
  const Splits s = gen_synthetic(spec);
  TrialConfig c = small_trial();
  c.training.epochs = 0;
  double auc = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TrialResult r = train_trial(c, s.train, s.test, seed);
    EXPECT_TRUE(r.loss_trace.empty());
    auc += r.metrics.auc / 10.0;
  }
  EXPECT_GE(auc, 0.3);
  EXPECT_LE(auc, 0.7);
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  const Splits s = gen_synthetic(small_data());
  for (const auto& v : {adapters::Variant::lora(), adapters::Variant::hlora(), adapters::Variant::qlora()}) {
    const TrialConfig c = small_trial(v);
    const TrialResult a = train_trial(c, s.train, s.test, 7);
    const TrialResult b = train_trial(c, s.train, s.test, 7);
    EXPECT_EQ(a.loss_trace, b.loss_trace) << adapters::to_string(v);
    EXPECT_EQ(a.metrics.auc, b.metrics.auc);
    EXPECT_NE(a.loss_trace, train_trial(c, s.train, s.test, 8).loss_trace);
  }
}

TEST(Train, LoraLossDecreases) {
  const Splits s = gen_synthetic(small_data());
  TrialConfig c = small_trial();
  c.training.epochs = 15;
  const TrialResult r = train_trial(c, s.train, s.test, 1);
  ASSERT_EQ(r.loss_trace.size(), 15u);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  EXPECT_GT(r.metrics.auc, 0.7);
  EXPECT_EQ(r.epoch_seconds.size(), 15u);
}

TEST(Train, BackboneStaysFrozen) {
  const Splits s = gen_synthetic(small_data());
  const TrialConfig c = small_trial(adapters::Variant::hlora());
  TrainedModel model;
  train_trial(c, s.train, s.test, 2, &model);
  EXPECT_EQ(model.backbone.weights(), adapters::Backbone::generate(16, 16, 3).weights());
  EXPECT_NE(model.adapter.a_up, Matrix(4, 16, 0.0));
}

TEST(Train, HugeLearningRateDiverges) {
  const Splits s = gen_synthetic(small_data());
  TrialConfig c = small_trial();
  c.training.learning_rate = 1e300;
  EXPECT_THROW(train_trial(c, s.train, s.test, 0), DivergedError);
}

TEST(Train, NonFiniteFeaturesDiverge) {
  Splits s = gen_synthetic(small_data());
  s.train.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train_trial(small_trial(), s.train, s.test, 0), DivergedError);
}

TEST(Train, RejectsBadTrainingConfig) {
  const Splits s = gen_synthetic(small_data());
  TrialConfig c = small_trial();
  c.training.batch_size = 0;
  EXPECT_THROW(train_trial(c, s.train, s.test, 0), ConfigError);
  c = small_trial();
  c.training.learning_rate = 0;
  EXPECT_THROW(train_trial(c, s.train, s.test, 0), ConfigError);
  c = small_trial(adapters::Variant::qlora(), 8);
  EXPECT_THROW(train_trial(c, s.train, s.test, 0), ConfigError);
}

TEST(Train, ParameterCountsInResult) {
  const Splits s = gen_synthetic(small_data());
  const TrialResult lora = train_trial(small_trial(), s.train, s.test, 0);
  const TrialResult hlora = train_trial(small_trial(adapters::Variant::hlora()), s.train, s.test, 0);
  EXPECT_EQ(lora.adapter_params, 2u * 16u * 4u);
  EXPECT_EQ(lora.trainable_params, lora.adapter_params + 17u);
  EXPECT_EQ(hlora.adapter_params, lora.adapter_params + 1u);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(cfg, 2);
  std::vector<double> p{1.0, -1.0};
  const std::vector<double> g{3.0, -0.5};
  adam.step(p, g);
  EXPECT_NEAR(p[0], 0.9, 1e-8);
  EXPECT_NEAR(p[1], -0.9, 1e-8);
}

TEST(Summary, MeanAndSampleStd) {
  std::vector<TrialResult> rs(2);
  rs[0].metrics.auc = 0.6;
  rs[1].metrics.auc = 0.8;
  rs[0].epoch_seconds = {1.0, 3.0};
  rs[1].epoch_seconds = {2.0};
  const ProtocolSummary s = summarize(rs);
  EXPECT_NEAR(s.mean.at("auc"), 0.7, 1e-15);
  EXPECT_NEAR(s.std.at("auc"), std::sqrt(0.02), 1e-15);
  EXPECT_NEAR(s.mean.at("epoch_seconds"), 2.0, 1e-15);
  EXPECT_NEAR(s.std.at("epoch_seconds"), 0.0, 1e-15);
  for (const auto& key : kSummaryKeys) EXPECT_TRUE(s.mean.contains(key)) << key;
}

TEST(Summary, SingleSeedHasZeroStd) {
  std::vector<TrialResult> rs(1);
  rs[0].metrics.acc = 0.9;
  const ProtocolSummary s = summarize(rs);
  EXPECT_EQ(s.mean.at("acc"), 0.9);
  EXPECT_EQ(s.std.at("acc"), 0.0);
}

TEST(Protocol, DeterministicAcrossRuns) {
  const ProtocolConfig p = small_protocol(adapters::Variant::hlora());
  const nlohmann::json echo = {{"tag", 1}};
  const auto a = cli::without_timing(cli::summary_to_json(run_protocol(p), echo));
  const auto b = cli::without_timing(cli::summary_to_json(run_protocol(p), echo));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["per_seed"].size(), 3u);
}

TEST(Protocol, SeedsDrawDifferentTrainingSets) {
  DataSource src;
  src.synthetic = small_data();
  const Splits a = trial_data(src, 0), b = trial_data(src, 1);
  EXPECT_NE(a.train.features, b.train.features);
  EXPECT_EQ(a.test, b.test);
}

TEST(Protocol, FailuresNameTheSeed) {
  ProtocolConfig p = small_protocol();
  p.trial.training.learning_rate = 1e300;
  p.seeds = {3};
  try {
    run_protocol(p);
    FAIL() << "expected DivergedError";
  } catch (const DivergedError& e) {
    EXPECT_NE(std::string(e.what()).find("seed 3"), std::string::npos) << e.what();
  }
}

TEST(Ablation, SweepShapes) {
  ProtocolConfig p = small_protocol();
  p.trial.training.epochs = 1;
  p.seeds = {0};
  const auto rank = run_ablation(p, Sweep::rank);
  ASSERT_EQ(rank.size(), 9u);
  for (const auto& e : rank) EXPECT_EQ(e.summary.per_seed.size(), 1u);
  EXPECT_EQ(rank.front().r, 2);
  EXPECT_THROW(parse_sweep("depth"), ConfigError);
  EXPECT_EQ(parse_sweep(to_string(Sweep::layers)), Sweep::layers);
}

TEST(Bench, TimingsArePositive) {
  const ProtocolConfig p = small_protocol(adapters::Variant::qlora());
  const TimingReport t = bench_timing(p, 3, 100);
  EXPECT_GT(t.epoch_seconds, 0.0);
  EXPECT_GT(t.inference_seconds, 0.0);
  EXPECT_EQ(t.timed_epochs, 3);
  EXPECT_EQ(t.inference_calls, 100);
  EXPECT_EQ(t.adapter_params, 2u * 16u * 4u + 24u);
  EXPECT_EQ(bench_timing(p, 1, 10).timed_epochs, 3);
}

TEST(ModelJson, RoundTripPreservesPredictions) {
  const Splits s = gen_synthetic(small_data());
  const TrialConfig c = small_trial(adapters::Variant::qlora());
  TrainedModel trained;
  train_trial(c, s.train, s.test, 4, &trained);
  const auto doc = cli::model_to_json(trained);

  TrainedModel fresh;
  train_trial([&] { auto z = c; z.training.epochs = 0; return z; }(), s.train, s.test, 9, &fresh);
  EXPECT_NE(predict_logits(fresh, s.test.features), predict_logits(trained, s.test.features));
  cli::model_from_json(doc, fresh);
  EXPECT_EQ(predict_logits(fresh, s.test.features), predict_logits(trained, s.test.features));

  TrainedModel other;
  train_trial([&] { auto z = small_trial(); z.training.epochs = 0; return z; }(), s.train, s.test, 0, &other);
  EXPECT_THROW(cli::model_from_json(doc, other), ConfigError);
}

}  // namespace
