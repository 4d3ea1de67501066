#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rgn/numerics/tensor.hpp"

namespace rgn {

enum class ThresholdPolicy { fixed_half, train_tuned };

namespace detail {

inline void check_scores(std::span<const real> scores, std::span<const real> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError(std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw DataError("no scores to evaluate");
  for (auto y : labels)
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
}

}  // namespace detail

// A score at or above the threshold is a "kin" decision.
inline real accuracy_at_threshold(std::span<const real> scores, std::span<const real> labels, real threshold) {
  detail::check_scores(scores, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) correct += (scores[i] >= threshold) == (labels[i] == 1);
  return real(correct) / real(scores.size());
}

/// Threshold maximising accuracy on the given scores. Candidates are the
/// midpoints between consecutive distinct scores plus one value below and one
/// above the range; the lowest best candidate wins.
inline real tune_threshold(std::span<const real> scores, std::span<const real> labels) {
  detail::check_scores(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Threshold below everything: all predicted positive.
  std::size_t positives = 0;
  for (auto y : labels) positives += y == 1;
  std::size_t correct = positives;
  std::size_t best = correct;
  real best_t = scores[order.front()] - 1;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      // This score moves to the negative side.
      correct += labels[order[j]] == 1 ? std::size_t(0) : std::size_t(1);
      correct -= labels[order[j]] == 1 ? std::size_t(1) : std::size_t(0);
      ++j;
    }
    const real t = j < order.size() ? (scores[order[i]] + scores[order[j]]) / 2 : scores[order[i]] + 1;
    if (correct > best) {
      best = correct;
      best_t = t;
    }
    i = j;
  }
  return best_t;
}

/// Fraction of correct decisions. fixed_half thresholds probabilities at 0.5;
/// train_tuned picks the threshold on the training scores and applies it to
/// the test scores.
inline real verification_rate(std::span<const real> scores, std::span<const real> labels, ThresholdPolicy policy,
                              std::span<const real> train_scores = {}, std::span<const real> train_labels = {}) {
  if (policy == ThresholdPolicy::fixed_half) return accuracy_at_threshold(scores, labels, real(0.5));
  return accuracy_at_threshold(scores, labels, tune_threshold(train_scores, train_labels));
}

struct RocCurve {
  std::vector<std::pair<real, real>> points;  // (fpr, tpr), from (0,0) to (1,1)
  real auc = 0;
};

/// Threshold sweep from the highest score down; tied scores move together,
/// giving one diagonal segment. AUC by the trapezoidal rule.
inline RocCurve roc_auc(std::span<const real> scores, std::span<const real> labels) {
  detail::check_scores(scores, labels);
  std::size_t pos = 0;
  for (auto y : labels) pos += y == 1;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw DataError("ROC needs both positive and negative samples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0, 0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    const real fpr = real(fp) / real(neg), tpr = real(tp) / real(pos);
    const auto& prev = roc.points.back();
    roc.auc += (fpr - prev.first) * (tpr + prev.second) / 2;
    roc.points.emplace_back(fpr, tpr);
    i = j;
  }
  return roc;
}

}  // namespace rgn
