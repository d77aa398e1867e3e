#include "leq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace leq::train {

namespace {

void require_both_classes(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (const int l : labels) {
    if (l == 1) pos = true;
    else neg = true;
  }
  if (!pos || !neg) {
    throw std::invalid_argument("metric undefined: both classes must be present");
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("roc_auc: scores and labels must align");
  }
  require_both_classes(labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // average ranks over ties, then the Mann-Whitney U statistic
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == 1) {
      rank_sum_pos += rank[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Rejection background_rejection(std::span<const double> scores,
                               std::span<const int> labels, double eps_s) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("background_rejection: scores and labels must align");
  }
  if (!(eps_s > 0.0 && eps_s < 1.0)) {
    throw std::invalid_argument("background_rejection: eps_s must be in (0, 1)");
  }
  require_both_classes(labels);

  std::vector<double> sig, bkg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] == 1 ? sig : bkg).push_back(scores[i]);
  }
  std::sort(sig.begin(), sig.end(), std::greater<>());
  // smallest k with k/n_sig >= eps_s; classifying "score >= sig[k-1]" keeps
  // at least eps_s of the signal at the largest feasible threshold
  const std::size_t n_sig = sig.size();
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(eps_s * static_cast<double>(n_sig) - 1e-12));
  const double threshold = sig[std::min(k == 0 ? 0 : k - 1, n_sig - 1)];

  std::size_t false_pos = 0;
  for (const double b : bkg) {
    if (b >= threshold) ++false_pos;
  }
  if (false_pos == 0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  const double eps_b =
      static_cast<double>(false_pos) / static_cast<double>(bkg.size());
  return {1.0 / eps_b, false};
}

std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                 std::span<const int> labels) {
  require_both_classes(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double n_pos = 0, n_neg = 0;
  for (const int l : labels) (l == 1 ? n_pos : n_neg) += 1.0;
  std::vector<std::pair<double, double>> curve;
  curve.emplace_back(0.0, 0.0);
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] == 1) tp += 1;
      else fp += 1;
      ++i;
    }
    curve.emplace_back(fp / n_neg, tp / n_pos);
  }
  return curve;
}

}  // namespace leq::train
