#pragma once

#include <span>
#include <vector>

namespace leq::train {

/// Mann-Whitney AUC with tie handling: P(score_pos > score_neg) + P(tie)/2.
/// Throws std::invalid_argument when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Rejection {
  double value = 0.0;   // 1 / false-positive rate at the operating point
  bool infinite = false;  // no background passes the threshold
};

/// Background rejection 1/eps_B at signal efficiency >= eps_s: the threshold
/// is the largest score keeping true-positive rate >= eps_s, which minimizes
/// the false-positive rate over the feasible set.
Rejection background_rejection(std::span<const double> scores,
                               std::span<const int> labels, double eps_s);

/// ROC curve as (fpr, tpr) pairs over all score thresholds, descending.
std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                 std::span<const int> labels);

}  // namespace leq::train
