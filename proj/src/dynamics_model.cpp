#include "lmj/dynamics_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lmj/error.hpp"

namespace lmj {

std::vector<TrainingPair> build_training_pairs(std::span<const LatentFrame> latents,
                                               std::span<const GeneralizedState> gs,
                                               std::span<const std::size_t> labels,
                                               std::size_t cluster, const UkfParams& ukf) {
  if (labels.size() != gs.size())
    throw InvalidInput("build_training_pairs: labels not aligned with generalized states");
  if (!gs.empty() && latents.size() != gs.size() + 1)
    throw InvalidInput("build_training_pairs: expected one more latent frame than states");

  std::vector<TrainingPair> pairs;
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const std::size_t k = j + 1;
    if (labels[j] != cluster || k + 1 >= latents.size()) continue;
    const LatentFrame& now = latents[k];
    const LatentFrame& next = latents[k + 1];
    const std::size_t l = now.dim();

    const SigmaPointSet a = sigma_points(now.mu, Matrix::diagonal(now.sigma2), ukf);
    const SigmaPointSet b = sigma_points(next.mu, Matrix::diagonal(next.sigma2), ukf);
    for (std::size_t i = 0; i < 2 * l + 1; ++i) {
      TrainingPair p{a.points[i], b.points[i]};
      for (std::size_t d = 0; d < l; ++d) p.target[d] -= a.points[i][d];
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

DynamicsNet train_dynamics(std::span<const TrainingPair> pairs, std::size_t cluster,
                           std::size_t latent_dim, const Matrix& fallback_velocity_cov,
                           const DynamicsTrainConfig& cfg) {
  if (latent_dim == 0) throw InvalidInput("train_dynamics: latent dimension must be positive");
  for (const auto& p : pairs)
    if (p.input.size() != latent_dim || p.target.size() != latent_dim)
      throw InvalidInput("train_dynamics: pair dimension mismatch");

  DynamicsNet d;
  d.cluster = cluster;
  d.noise_diag.assign(latent_dim, kNoiseFloor);
  const std::size_t hidden = std::max<std::size_t>(1, cfg.hidden_factor * latent_dim);

  if (pairs.size() < cfg.min_pairs_factor * 2 * latent_dim) {
    if (fallback_velocity_cov.rows() != latent_dim || fallback_velocity_cov.cols() != latent_dim)
      throw InvalidInput("train_dynamics: fallback covariance shape mismatch");
    d.fallback = true;
    d.net = zero_mlp({latent_dim, hidden, latent_dim}, cfg.activation);
    for (std::size_t i = 0; i < latent_dim; ++i)
      d.noise_diag[i] = std::max(kNoiseFloor, fallback_velocity_cov(i, i));
    return d;
  }

  Rng rng(cfg.seed + 7919 * cluster);
  d.net = init_mlp({latent_dim, hidden, latent_dim}, cfg.activation, rng);
  AdamOptimizer opt(d.net, cfg.learning_rate);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      MlpGradient g = zero_gradient(d.net);
      for (std::size_t b = start; b < stop; ++b) {
        const TrainingPair& p = pairs[order[b]];
        const MlpTrace t = mlp_forward_trace(d.net, p.input);
        Vector residual(t.output());
        for (std::size_t r = 0; r < residual.size(); ++r) residual[r] -= p.target[r];
        mlp_backward(d.net, t, residual, g);
      }
      scale(g, 1.0 / static_cast<double>(stop - start));
      try {
        opt.step(d.net, g);
      } catch (const NumericDomain& e) {
        throw TrainingFailure("train_dynamics: cluster " + std::to_string(cluster) +
                              " diverged in epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }
  }

  // Residual covariance diagonal on the training pairs.
  Vector mean(latent_dim, 0.0);
  std::vector<Vector> residuals;
  residuals.reserve(pairs.size());
  for (const auto& p : pairs) {
    Vector r = mlp_forward(d.net, p.input);
    for (std::size_t i = 0; i < latent_dim; ++i) {
      r[i] -= p.target[i];
      mean[i] += r[i];
    }
    residuals.push_back(std::move(r));
  }
  const double n = static_cast<double>(pairs.size());
  for (double& m : mean) m /= n;
  Vector var(latent_dim, 0.0);
  for (const auto& r : residuals)
    for (std::size_t i = 0; i < latent_dim; ++i) var[i] += (r[i] - mean[i]) * (r[i] - mean[i]);
  for (std::size_t i = 0; i < latent_dim; ++i) {
    const double v = var[i] / n;
    if (!std::isfinite(v))
      throw TrainingFailure("train_dynamics: cluster " + std::to_string(cluster) +
                            " produced non-finite residuals");
    d.noise_diag[i] = std::max(kNoiseFloor, v);
  }
  return d;
}

Vector predict_velocity(const DynamicsNet& d, std::span<const double> mu,
                        std::span<const double> current_velocity) {
  if (mu.size() != d.latent_dim())
    throw InvalidInput("predict_velocity: mu length " + std::to_string(mu.size()) +
                       ", expected " + std::to_string(d.latent_dim()));
  if (d.fallback) {
    if (current_velocity.size() != d.latent_dim())
      throw InvalidInput("predict_velocity: fallback model needs the current velocity");
    return Vector(current_velocity.begin(), current_velocity.end());
  }
  return mlp_forward(d.net, mu);
}

double dynamics_rmse(const DynamicsNet& d, std::span<const TrainingPair> pairs) {
  if (pairs.empty()) return 0.0;
  double sse = 0.0;
  std::size_t count = 0;
  for (const auto& p : pairs) {
    const Vector out = predict_velocity(d, p.input);
    for (std::size_t i = 0; i < out.size(); ++i) {
      sse += (out[i] - p.target[i]) * (out[i] - p.target[i]);
      ++count;
    }
  }
  return std::sqrt(sse / static_cast<double>(count));
}

}  // namespace lmj
