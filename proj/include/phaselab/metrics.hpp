#pragma once

#include <span>

namespace phaselab::fewshot {

// Every metric throws UndefinedMetric unless both classes are present.

// Mann-Whitney statistic; tied positive/negative pairs count 1/2.
double compute_auc(std::span<const double> scores, std::span<const int> labels);

struct ThresholdMetrics {
  double acc = 0.0;
  double pr = 0.0;
  double re = 0.0;
  double f1 = 0.0;
  bool pr_undefined = false;  // no positive predictions; pr reported as 0
};

// Predicts positive when score >= threshold.
ThresholdMetrics compute_threshold_metrics(std::span<const double> scores,
                                           std::span<const int> labels, double threshold = 0.5);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Sweeps every distinct score as a ">= t" threshold plus one point above the
// maximum; where FPR - FNR changes sign between two adjacent points the
// crossing is linearly interpolated.
EerResult compute_eer(std::span<const double> scores, std::span<const int> labels);

struct Metrics {
  double auc = 0.0;
  double acc = 0.0;
  double pr = 0.0;
  double re = 0.0;
  double f1 = 0.0;
  double eer = 0.0;
  bool pr_undefined = false;
};

// Metric suite from raw logits: AUC/EER on logits, thresholded metrics on
// sigmoid(logit) >= 0.5.
Metrics evaluate_logits(std::span<const double> logits, std::span<const int> labels);

}  // namespace phaselab::fewshot
