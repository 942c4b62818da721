#include "lmj/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "lmj/error.hpp"

namespace lmj {

double roc_auc(std::span<const double> score, const std::vector<bool>& truth) {
  if (score.size() != truth.size()) throw InvalidInput("roc_auc: score and truth lengths differ");
  const std::size_t n = score.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

  // Sweep thresholds from low to high; tied scores form one group and count
  // half for each positive/negative pair they share.
  double pairs_won = 0.0;
  double negatives_below = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t group_pos = 0;
    std::size_t group_neg = 0;
    while (j < n && score[idx[j]] == score[idx[i]]) {
      (truth[idx[j]] ? group_pos : group_neg) += 1;
      ++j;
    }
    pairs_won += static_cast<double>(group_pos) *
                 (negatives_below + 0.5 * static_cast<double>(group_neg));
    negatives_below += static_cast<double>(group_neg);
    positives += group_pos;
    i = j;
  }
  const double negatives = negatives_below;
  if (positives == 0 || negatives == 0.0)
    throw InvalidInput("roc_auc: need both positive and negative frames");
  return pairs_won / (static_cast<double>(positives) * negatives);
}

DetectionMetrics detection_metrics(const std::vector<bool>& flags, std::span<const double> score,
                                   const std::vector<bool>& truth) {
  if (flags.size() != truth.size() || score.size() != truth.size())
    throw InvalidInput("detection_metrics: flags, score and truth must align");
  DetectionMetrics m;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++m.positives;
      if (flags[i]) ++tp;
    } else {
      ++m.negatives;
      if (flags[i]) ++fp;
    }
  }
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = m.positives > 0 ? static_cast<double>(tp) / static_cast<double>(m.positives) : 0.0;
  m.false_positive_rate =
      m.negatives > 0 ? static_cast<double>(fp) / static_cast<double>(m.negatives) : 0.0;
  m.auc = (m.positives > 0 && m.negatives > 0) ? roc_auc(score, truth) : 0.0;
  return m;
}

}  // namespace lmj
