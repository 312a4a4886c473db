#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phaselab/error.hpp"
#include "phaselab/metrics.hpp"
#include "phaselab/reference.hpp"

namespace {

using namespace phaselab;
using namespace phaselab::fewshot;

TEST(Auc, PerfectAndReversedRankings) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  EXPECT_DOUBLE_EQ(compute_auc(s, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(compute_auc(s, std::vector<int>{1, 1, 0, 0}), 0.0);
}

TEST(Auc, OneSwappedPairGivesThreeQuarters) {
  const std::vector<double> s{0.1, 0.6, 0.4, 0.9};
  EXPECT_DOUBLE_EQ(compute_auc(s, std::vector<int>{0, 0, 1, 1}), 0.75);
}

TEST(Auc, TiesCountHalf) {
  const std::vector<double> s{0.5, 0.5, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(compute_auc(s, std::vector<int>{0, 1, 0, 1}), 0.5);
}

TEST(Threshold, CountsAtGivenThreshold) {
  const std::vector<double> s{0.9, 0.7, 0.4, 0.2, 0.6};
  const std::vector<int> y{1, 0, 1, 0, 1};
  const auto m = compute_threshold_metrics(s, y, 0.5);
  // tp 2, fp 1, fn 1, tn 1.
  EXPECT_DOUBLE_EQ(m.acc, 0.6);
  EXPECT_DOUBLE_EQ(m.pr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.re, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
  EXPECT_FALSE(m.pr_undefined);
  // Score equal to the threshold predicts positive.
  EXPECT_DOUBLE_EQ(compute_threshold_metrics(s, y, 0.6).re, 2.0 / 3.0);
}

TEST(Threshold, NoPositivePredictionsFlagsPrecision) {
  const std::vector<double> s{0.1, 0.2};
  const auto m = compute_threshold_metrics(s, std::vector<int>{0, 1}, 0.5);
  EXPECT_TRUE(m.pr_undefined);
  EXPECT_EQ(m.pr, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_DOUBLE_EQ(m.acc, 0.5);
}

TEST(Eer, PerfectSeparationIsZero) {
  const std::vector<double> s{-2, -1, 1, 2};
  EXPECT_DOUBLE_EQ(compute_eer(s, std::vector<int>{0, 0, 1, 1}).eer, 0.0);
}

TEST(Eer, FullOverlapIsHalf) {
  const std::vector<double> s{0.3, 0.3, 0.3, 0.3};
  EXPECT_DOUBLE_EQ(compute_eer(s, std::vector<int>{0, 1, 1, 0}).eer, 0.5);
  const std::vector<double> mirrored{1, 2, 1, 2};
  EXPECT_DOUBLE_EQ(compute_eer(mirrored, std::vector<int>{0, 0, 1, 1}).eer, 0.5);
}

TEST(Eer, ReversedRankingIsOne) {
  const std::vector<double> s{2, 1};
  EXPECT_DOUBLE_EQ(compute_eer(s, std::vector<int>{0, 1}).eer, 1.0);
}

TEST(Metrics, SingleClassIsUndefined) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> ones{1, 1};
  EXPECT_THROW(compute_auc(s, ones), UndefinedMetric);
  EXPECT_THROW(compute_threshold_metrics(s, ones), UndefinedMetric);
  EXPECT_THROW(compute_eer(s, ones), UndefinedMetric);
  EXPECT_THROW(evaluate_logits(s, std::vector<int>{0, 0}), UndefinedMetric);
}

TEST(Metrics, MalformedInputs) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(compute_auc(s, std::vector<int>{0}), InvalidInput);
  EXPECT_THROW(compute_auc(s, std::vector<int>{0, 3}), InvalidInput);
}

struct Sample {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Integer-valued scores so ties are common.
Sample random_sample(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, 100), score(-5, 5), bit(0, 1);
  Sample s;
  const int n = size(rng);
  for (int i = 0; i < n; ++i) {
    s.labels.push_back(bit(rng));
    s.scores.push_back(score(rng) + 0.5 * s.labels.back());
  }
  s.labels[0] = 0;
  s.labels[1] = 1;
  return s;
}

TEST(MetricsProperty, MatchBruteForceCounting) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const Sample s = random_sample(rng);
    EXPECT_NEAR(compute_auc(s.scores, s.labels), reference::brute_auc(s.scores, s.labels), 1e-12);
    const auto t = compute_threshold_metrics(s.scores, s.labels, 0.25);
    const auto b = reference::brute_threshold_metrics(s.scores, s.labels, 0.25);
    EXPECT_NEAR(t.acc, b.acc, 1e-12);
    EXPECT_NEAR(t.pr, b.pr, 1e-12);
    EXPECT_NEAR(t.re, b.re, 1e-12);
    EXPECT_NEAR(t.f1, b.f1, 1e-12);
    EXPECT_NEAR(compute_eer(s.scores, s.labels).eer, reference::brute_eer(s.scores, s.labels), 1e-12);
  }
}

TEST(MetricsProperty, InvariantUnderMonotoneMaps) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = random_sample(rng);
    std::vector<double> mapped;
    for (double v : s.scores) mapped.push_back(std::exp(0.3 * v) + 7.0);
    EXPECT_DOUBLE_EQ(compute_auc(mapped, s.labels), compute_auc(s.scores, s.labels));
    EXPECT_NEAR(compute_eer(mapped, s.labels).eer, compute_eer(s.scores, s.labels).eer, 1e-12);
  }
}

TEST(MetricsProperty, AccuracyAndRecallIdentities) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = random_sample(rng);
    const auto m = compute_threshold_metrics(s.scores, s.labels, 0.0);
    std::size_t wrong = 0, fn = 0, pos = 0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      const bool pred = s.scores[i] >= 0.0;
      wrong += pred != (s.labels[i] == 1);
      if (s.labels[i] == 1) {
        ++pos;
        fn += !pred;
      }
    }
    EXPECT_NEAR(m.acc + static_cast<double>(wrong) / static_cast<double>(s.scores.size()), 1.0, 1e-12);
    EXPECT_NEAR(m.re, 1.0 - static_cast<double>(fn) / static_cast<double>(pos), 1e-12);
  }
}

TEST(EvaluateLogits, ThresholdsSigmoidAtHalf) {
  const std::vector<double> logits{-3.0, 0.0, 2.0, -0.1};
  const std::vector<int> y{0, 1, 1, 1};
  const Metrics m = evaluate_logits(logits, y);
  EXPECT_DOUBLE_EQ(m.acc, 0.75);  // logit 0 maps to 0.5, predicted positive
  EXPECT_DOUBLE_EQ(m.re, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.auc, 1.0);
  EXPECT_DOUBLE_EQ(m.eer, 0.0);
}

}  // namespace
