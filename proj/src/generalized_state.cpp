#include "lmj/generalized_state.hpp"

#include <cmath>
#include <string>

#include "lmj/error.hpp"
#include "lmj/kernels.hpp"

namespace lmj {

Vector GeneralizedState::stacked() const {
  Vector z(mu);
  z.insert(z.end(), mu_dot.begin(), mu_dot.end());
  return z;
}

std::vector<GeneralizedState> build_gs_sequence(std::span<const LatentFrame> latents) {
  if (latents.size() < 2)
    throw InvalidInput("build_gs_sequence: need at least 2 latent frames, got " +
                       std::to_string(latents.size()));
  const std::size_t l = latents.front().dim();
  std::vector<GeneralizedState> out;
  out.reserve(latents.size() - 1);
  for (std::size_t k = 1; k < latents.size(); ++k) {
    if (latents[k].dim() != l) throw InvalidInput("build_gs_sequence: latent dimension changes");
    GeneralizedState gs{latents[k].mu, Vector(l)};
    for (std::size_t i = 0; i < l; ++i) gs.mu_dot[i] = latents[k].mu[i] - latents[k - 1].mu[i];
    out.push_back(std::move(gs));
  }
  return out;
}

double UkfParams::lambda(std::size_t n) const {
  const double nd = static_cast<double>(n);
  return alpha * alpha * (nd + kappa) - nd;
}

SigmaPointSet sigma_points(std::span<const double> mean, const Matrix& cov, const UkfParams& ukf) {
  const std::size_t n = mean.size();
  if (n == 0 || cov.rows() != n || cov.cols() != n)
    throw InvalidInput("sigma_points: covariance shape does not match mean");
  SigmaPointSet set;
  set.params = ukf;
  set.lambda = ukf.lambda(n);
  const double spread = static_cast<double>(n) + set.lambda;
  if (!(spread > 0.0)) throw InvalidInput("sigma_points: n + lambda must be positive");

  const Matrix root = matrix_sqrt_psd(cov * spread);
  set.points.assign(2 * n + 1, Vector(mean.begin(), mean.end()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      set.points[1 + i][r] += root(r, i);
      set.points[1 + n + i][r] -= root(r, i);
    }
  }
  set.mean_weights.assign(2 * n + 1, 1.0 / (2.0 * spread));
  set.cov_weights = set.mean_weights;
  set.mean_weights[0] = set.lambda / spread;
  set.cov_weights[0] = set.mean_weights[0] + (1.0 - ukf.alpha * ukf.alpha + ukf.beta);
  return set;
}

Gaussian unscented_stats(const SigmaPointSet& set, std::span<const Vector> transformed) {
  if (transformed.size() != set.points.size())
    throw InvalidInput("unscented_stats: expected " + std::to_string(set.points.size()) +
                       " transformed points, got " + std::to_string(transformed.size()));
  const std::size_t m = transformed.front().size();
  const auto& k = kernels::active();
  Gaussian g{Vector(m, 0.0), Matrix(m, m)};
  for (std::size_t i = 0; i < transformed.size(); ++i) {
    if (transformed[i].size() != m)
      throw InvalidInput("unscented_stats: transformed points differ in dimension");
    k.axpy(set.mean_weights[i], transformed[i].data(), g.mean.data(), m);
  }
  Vector dev(m);
  for (std::size_t i = 0; i < transformed.size(); ++i) {
    for (std::size_t r = 0; r < m; ++r) dev[r] = transformed[i][r] - g.mean[r];
    Vector scaled(dev);
    for (double& v : scaled) v *= set.cov_weights[i];
    k.outer_acc(g.cov.data().data(), m, m, scaled.data(), dev.data());
  }
  g.cov = symmetrized(g.cov);
  return g;
}

}  // namespace lmj
