#include "lmj/amjpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmj/error.hpp"

namespace lmj {

namespace {

std::size_t draw_categorical(std::span<const double> probs, double u) {
  double run = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    run += probs[i];
    if (u < run) return i;
  }
  // Rounding left u above the final cumulative sum: take the last non-zero entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

SigmaPointSet sigma_points_repaired(const Particle& p, const UkfParams& ukf) {
  try {
    return sigma_points(p.mean, p.cov, ukf);
  } catch (const NumericDomain&) {
    Matrix repaired = symmetrized(p.cov);
    for (std::size_t i = 0; i < repaired.rows(); ++i) repaired(i, i) += kCovarianceRepairJitter;
    return sigma_points(p.mean, repaired, ukf);
  }
}

}  // namespace

void FilterModel::validate() const {
  const std::size_t c = clusters.cluster_count();
  if (c == 0) throw InvalidInput("filter model has no clusters");
  if (transitions.size() != c) throw InvalidInput("transition matrix does not match clusters");
  if (dynamics.size() != c) throw InvalidInput("dynamics model count does not match clusters");
  if (clusters.member_counts.size() != c || clusters.covariances.size() != c)
    throw InvalidInput("cluster statistics incomplete");
  for (std::size_t s = 0; s < c; ++s) {
    if (dynamics[s].latent_dim() != latent_dim())
      throw InvalidInput("dynamics model " + std::to_string(s) + " has wrong latent dimension");
  }
}

void AmjpfConfig::validate() const {
  if (particles == 0) throw InvalidInput("particle count must be at least 1");
  if (window == 0) throw InvalidInput("anomaly window must be at least 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("resampling temperature must be > 0");
}

ParticleSet init_filter(const FilterModel& model, const AmjpfConfig& cfg,
                        const LatentFrame& first, Rng& rng) {
  model.validate();
  cfg.validate();
  const std::size_t l = model.latent_dim();
  if (first.dim() != l) throw InvalidInput("init_filter: latent dimension mismatch");

  const Vector priors = model.clusters.priors();
  std::vector<double> draws(cfg.particles);
  for (double& u : draws) u = rng.uniform();

  ParticleSet particles(cfg.particles);
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    Particle& p = particles[i];
    p.label = draw_categorical(priors, draws[i]);
    p.mean = first.mu;
    p.mean.resize(2 * l, 0.0);
    p.cov = block_diag(Matrix::diagonal(first.sigma2),
                       model.clusters.raw_velocity_covariance(p.label));
    p.weight = 1.0 / static_cast<double>(cfg.particles);
    p.predicted_mean = p.mean;
    p.updated_mean = p.mean;
  }
  return particles;
}

void predict_step(ParticleSet& particles, const FilterModel& model, const AmjpfConfig& cfg,
                  Rng& rng) {
  const std::size_t l = model.latent_dim();
  std::vector<double> draws(particles.size());
  for (double& u : draws) u = rng.uniform();

  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle& p = particles[i];
    p.label = draw_categorical(model.transitions.probabilities.row(p.label), draws[i]);
    const DynamicsNet& dyn = model.dynamics[p.label];

    const SigmaPointSet set = sigma_points_repaired(p, cfg.ukf);
    std::vector<Vector> moved;
    moved.reserve(set.points.size());
    for (const Vector& z : set.points) {
      const std::span<const double> mu(z.data(), l);
      const std::span<const double> mu_dot(z.data() + l, l);
      const Vector v = predict_velocity(dyn, mu, mu_dot);
      Vector next(2 * l);
      for (std::size_t d = 0; d < l; ++d) {
        next[d] = mu[d] + v[d];
        next[l + d] = v[d];
      }
      moved.push_back(std::move(next));
    }
    Gaussian g = unscented_stats(set, moved);
    for (std::size_t d = 0; d < l; ++d) {
      g.cov(d, d) += dyn.noise_diag[d];
      g.cov(l + d, l + d) += dyn.noise_diag[d];
    }
    p.mean = std::move(g.mean);
    p.cov = std::move(g.cov);
    p.predicted_mean = p.mean;
  }
}

std::vector<double> update_step(ParticleSet& particles, const LatentFrame& obs) {
  std::vector<double> scores;
  scores.reserve(particles.size());
  for (Particle& p : particles) {
    const std::size_t l = obs.dim();
    if (p.mean.size() != 2 * l) throw InvalidInput("update_step: observation dimension mismatch");

    // Innovation covariance S = P^L + Sigma and cross covariance P H^T = P[:, 0:L].
    Matrix s = p.cov.block(0, 0, l, l);
    for (std::size_t d = 0; d < l; ++d) s(d, d) += obs.sigma2[d];
    const Matrix s_inv = spd_inverse(s);
    const Matrix gain = matmul(p.cov.block(0, 0, 2 * l, l), s_inv);

    Vector innovation(l);
    for (std::size_t d = 0; d < l; ++d) innovation[d] = obs.mu[d] - p.mean[d];
    const Vector shift = matvec(gain, innovation);
    for (std::size_t d = 0; d < 2 * l; ++d) p.mean[d] += shift[d];
    p.cov -= matmul(matmul(gain, s), gain.transposed());
    p.cov = symmetrized(p.cov);
    p.updated_mean = p.mean;
    scores.push_back(innovation_score(p, l));
  }
  return scores;
}

double innovation_score(const Particle& p, std::size_t latent_dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < latent_dim; ++d)
    s += std::abs(p.updated_mean[d] - p.predicted_mean[d]);
  return s / static_cast<double>(latent_dim);
}

AnomalyStep anomaly_and_resample(ParticleSet& particles, const AmjpfConfig& cfg, Rng& rng) {
  if (particles.empty()) throw InvalidInput("anomaly_and_resample: empty particle set");
  const std::size_t n = particles.size();
  const std::size_t l = particles.front().updated_mean.size() / 2;

  std::vector<double> scores(n);
  AnomalyStep step;
  step.y = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = innovation_score(particles[i], l);
    if (scores[i] < step.y) {
      step.y = scores[i];
      step.winning_label = particles[i].label;
    }
  }

  // Shifting by the minimum score leaves the normalized weights unchanged.
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = particles[i].weight * std::exp(-(scores[i] - step.y) / cfg.tau);
    total += w[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    step.weights_reset = true;
  } else {
    for (double& v : w) v /= total;
  }

  // Systematic resampling: one uniform offset, N evenly spaced pointers.
  const double u0 = rng.uniform() / static_cast<double>(n);
  ParticleSet resampled;
  resampled.reserve(n);
  double cumulative = w[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pointer = u0 + static_cast<double>(i) / static_cast<double>(n);
    while (pointer > cumulative && j + 1 < n) cumulative += w[++j];
    resampled.push_back(particles[j]);
    resampled.back().weight = 1.0 / static_cast<double>(n);
  }
  particles = std::move(resampled);
  return step;
}

double calibrate_threshold(std::span<const double> signal) {
  if (signal.size() < 2)
    throw InvalidInput("calibrate_threshold: need at least 2 values, got " +
                       std::to_string(signal.size()));
  const double n = static_cast<double>(signal.size());
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : signal) var += (v - mean) * (v - mean);
  return mean + 3.0 * std::sqrt(var / n);
}

std::vector<bool> window_filter(const std::vector<bool>& flags, std::size_t window) {
  if (window == 0) throw InvalidInput("window_filter: window must be at least 1");
  std::vector<bool> out(flags.size(), false);
  std::size_t i = 0;
  while (i < flags.size()) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < flags.size() && flags[end]) ++end;
    if (end - i >= window) std::fill(out.begin() + static_cast<std::ptrdiff_t>(i),
                                     out.begin() + static_cast<std::ptrdiff_t>(end), true);
    i = end;
  }
  return out;
}

AnomalyReport score_sequence(const FilterModel& model, std::span<const LatentFrame> latents,
                             const AmjpfConfig& cfg, double threshold) {
  if (latents.size() < 2)
    throw InvalidInput("score_sequence: need at least 2 frames, got " +
                       std::to_string(latents.size()));
  Rng rng(cfg.seed);
  ParticleSet particles = init_filter(model, cfg, latents.front(), rng);

  AnomalyReport report;
  report.threshold = threshold;
  for (std::size_t k = 1; k < latents.size(); ++k) {
    try {
      if (latents[k].dim() != model.latent_dim())
        throw InvalidInput("latent dimension mismatch");
      predict_step(particles, model, cfg, rng);
      update_step(particles, latents[k]);
      const AnomalyStep step = anomaly_and_resample(particles, cfg, rng);
      report.frame.push_back(k);
      report.y.push_back(step.y);
      report.raw_flag.push_back(step.y > threshold);
      report.winning_cluster.push_back(step.winning_label);
      if (step.weights_reset) ++report.weight_resets;
    } catch (const InvalidInput& e) {
      throw InvalidInput("score_sequence: frame " + std::to_string(k) + ": " + e.what());
    } catch (const NumericDomain& e) {
      throw NumericDomain("score_sequence: frame " + std::to_string(k) + ": " + e.what());
    }
  }
  report.final_flag = window_filter(report.raw_flag, cfg.window);
  return report;
}

}  // namespace lmj
