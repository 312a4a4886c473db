#include <algorithm>
#include <set>

#include "phaselab/reference.hpp"

namespace phaselab::reference {

double brute_auc(std::span<const double> scores, std::span<const int> labels) {
  double credit = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        credit += 1.0;
      } else if (scores[i] == scores[j]) {
        credit += 0.5;
      }
    }
  }
  return credit / pairs;
}

BruteCounts brute_threshold_metrics(std::span<const double> scores, std::span<const int> labels,
                                    double threshold) {
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pos = scores[i] >= threshold;
    if (labels[i] == 1 && pos) tp += 1;
    if (labels[i] == 1 && !pos) fn += 1;
    if (labels[i] == 0 && pos) fp += 1;
    if (labels[i] == 0 && !pos) tn += 1;
  }
  BruteCounts c{};
  c.acc = (tp + tn) / (tp + tn + fp + fn);
  c.pr = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
  c.re = tp / (tp + fn);
  c.f1 = (c.pr + c.re) > 0 ? 2 * c.pr * c.re / (c.pr + c.re) : 0.0;
  return c;
}

double brute_eer(std::span<const double> scores, std::span<const int> labels) {
  std::set<double> distinct(scores.begin(), scores.end());
  std::vector<double> thresholds(distinct.begin(), distinct.end());
  thresholds.push_back(thresholds.back() + 1.0);  // rejects everything
  std::vector<double> fpr, fnr;
  for (double t : thresholds) {
    double fp = 0, neg = 0, fn = 0, pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (labels[i] == 0) {
        neg += 1;
        if (scores[i] >= t) fp += 1;
      } else {
        pos += 1;
        if (scores[i] < t) fn += 1;
      }
    }
    fpr.push_back(fp / neg);
    fnr.push_back(fn / pos);
  }
  for (std::size_t i = 0; i < fpr.size(); ++i) {
    const double d0 = fpr[i] - fnr[i];
    if (d0 == 0.0) return fpr[i];
    if (i + 1 < fpr.size()) {
      const double d1 = fpr[i + 1] - fnr[i + 1];
      if (d0 > 0.0 && d1 < 0.0) {
        const double lam = d0 / (d0 - d1);
        return fpr[i] + lam * (fpr[i + 1] - fpr[i]);
      }
    }
  }
  return 0.5;
}

}  // namespace phaselab::reference
