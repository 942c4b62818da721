#pragma once

#include <span>
#include <vector>

namespace lmj {

struct DetectionMetrics {
  double precision = 0.0;  // 0 when nothing is flagged
  double recall = 0.0;     // 0 when there are no positives
  double false_positive_rate = 0.0;
  double auc = 0.0;        // raw signal vs. ground truth
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Area under the ROC curve of `score` against `truth` (ties count one half).
/// Throws InvalidInput on length mismatch or when either class is empty.
double roc_auc(std::span<const double> score, const std::vector<bool>& truth);

DetectionMetrics detection_metrics(const std::vector<bool>& flags, std::span<const double> score,
                                   const std::vector<bool>& truth);

}  // namespace lmj
