#pragma once

#include <span>
#include <vector>

#include "lmj/matrix.hpp"
#include "lmj/vae.hpp"

namespace lmj {

/// Latent mean stacked with its first difference.
struct GeneralizedState {
  Vector mu;
  Vector mu_dot;

  std::size_t latent_dim() const { return mu.size(); }
  /// [mu; mu_dot]
  Vector stacked() const;
  friend bool operator==(const GeneralizedState&, const GeneralizedState&) = default;
};

/// Entry j pairs latents[j + 1].mu with latents[j + 1].mu - latents[j].mu, so
/// the derivative belongs to the later frame. Throws InvalidInput for fewer
/// than two frames or mismatched dimensions.
std::vector<GeneralizedState> build_gs_sequence(std::span<const LatentFrame> latents);

/// Scaled unscented transform parameters; lambda = alpha^2 (n + kappa) - n.
struct UkfParams {
  double alpha = 0.1;
  double beta = 2.0;
  double kappa = 0.0;

  double lambda(std::size_t n) const;
  friend bool operator==(const UkfParams&, const UkfParams&) = default;
};

struct SigmaPointSet {
  std::vector<Vector> points;  // 2n + 1 points; 0 is the mean, i and i + n mirror each other
  Vector mean_weights;
  Vector cov_weights;
  UkfParams params;
  double lambda = 0.0;

  std::size_t dim() const { return points.front().size(); }
};

struct Gaussian {
  Vector mean;
  Matrix cov;
};

/// Sigma points of N(mean, cov). Throws NumericDomain for non-PSD cov and
/// InvalidInput for mismatched shapes or n + lambda <= 0.
SigmaPointSet sigma_points(std::span<const double> mean, const Matrix& cov, const UkfParams& ukf);

/// Weighted mean and (symmetrized) covariance of transformed sigma points.
Gaussian unscented_stats(const SigmaPointSet& set, std::span<const Vector> transformed);

}  // namespace lmj
