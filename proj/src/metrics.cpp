#include "phaselab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "phaselab/error.hpp"

namespace phaselab::fewshot {

namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  ClassCounts c;
  for (int l : labels) {
    if (l == 1) {
      ++c.pos;
    } else if (l == 0) {
      ++c.neg;
    } else {
      throw InvalidInput("labels must be 0 or 1");
    }
  }
  if (c.pos == 0 || c.neg == 0) throw UndefinedMetric("metric needs both classes present");
  return c;
}

}  // namespace

double compute_auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_binary(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average 1-based ranks over tie groups.
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(c.pos);
  const double nn = static_cast<double>(c.neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

ThresholdMetrics compute_threshold_metrics(std::span<const double> scores,
                                           std::span<const int> labels, double threshold) {
  check_binary(scores, labels);
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  ThresholdMetrics m;
  const auto n = static_cast<double>(scores.size());
  m.acc = static_cast<double>(tp + tn) / n;
  m.re = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tp + fp == 0) {
    m.pr = 0.0;
    m.pr_undefined = true;
  } else {
    m.pr = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  m.f1 = (m.pr + m.re) > 0.0 ? 2.0 * m.pr * m.re / (m.pr + m.re) : 0.0;
  return m;
}

EerResult compute_eer(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_binary(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  struct Point {
    double threshold, fpr, fnr;
  };
  std::vector<Point> pts;
  // Threshold at the i-th distinct score: everything below it is rejected.
  std::size_t neg_below = 0;
  std::size_t pos_below = 0;
  const auto nn = static_cast<double>(c.neg);
  const auto np = static_cast<double>(c.pos);
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    pts.push_back({t, static_cast<double>(c.neg - neg_below) / nn, static_cast<double>(pos_below) / np});
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == t) {
      labels[order[j]] == 1 ? ++pos_below : ++neg_below;
      ++j;
    }
    i = j;
  }
  const double top = scores[order.back()];
  pts.push_back({std::nextafter(top, std::numeric_limits<double>::infinity()), 0.0, 1.0});

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double diff = pts[i].fpr - pts[i].fnr;
    if (diff == 0.0) return {pts[i].fpr, pts[i].threshold};
    if (i + 1 < pts.size()) {
      const double next = pts[i + 1].fpr - pts[i + 1].fnr;
      if (diff > 0.0 && next < 0.0) {
        const double lam = diff / (diff - next);
        const double eer = pts[i].fpr + lam * (pts[i + 1].fpr - pts[i].fpr);
        const double thr = pts[i].threshold + lam * (pts[i + 1].threshold - pts[i].threshold);
        return {eer, thr};
      }
    }
  }
  // Unreachable: fpr - fnr starts at 1 and ends at -1.
  throw ContractError("EER sweep found no crossing");
}

Metrics evaluate_logits(std::span<const double> logits, std::span<const int> labels) {
  std::vector<double> prob(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) prob[i] = 1.0 / (1.0 + std::exp(-logits[i]));
  Metrics m;
  m.auc = compute_auc(logits, labels);
  const ThresholdMetrics t = compute_threshold_metrics(prob, labels, 0.5);
  m.acc = t.acc;
  m.pr = t.pr;
  m.re = t.re;
  m.f1 = t.f1;
  m.pr_undefined = t.pr_undefined;
  m.eer = compute_eer(logits, labels).eer;
  return m;
}

}  // namespace phaselab::fewshot
