#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmj/cluster_model.hpp"
#include "lmj/dynamics_model.hpp"
#include "lmj/generalized_state.hpp"
#include "lmj/matrix.hpp"
#include "lmj/rng.hpp"
#include "lmj/vae.hpp"

namespace lmj {

/// Everything the filter consumes from training.
struct FilterModel {
  ClusterModel clusters;
  TransitionMatrix transitions;
  std::vector<DynamicsNet> dynamics;  // indexed by cluster

  std::size_t latent_dim() const { return clusters.latent_dim; }
  /// Throws InvalidInput when the parts disagree in size or are missing.
  void validate() const;
  friend bool operator==(const FilterModel&, const FilterModel&) = default;
};

struct AmjpfConfig {
  std::size_t particles = 100;
  UkfParams ukf;
  double tau = 1.0;  // resampling temperature
  std::size_t window = 3;
  std::uint64_t seed = 2024;

  void validate() const;
};

/// One hypothesis: a regime label plus a Gaussian belief over [mu; mu_dot].
struct Particle {
  std::size_t label = 0;
  Vector mean;
  Matrix cov;
  double weight = 0.0;
  Vector predicted_mean;
  Vector updated_mean;
};

using ParticleSet = std::vector<Particle>;

inline constexpr double kCovarianceRepairJitter = 1e-9;

/// Labels from the cluster priors, mean [first.mu; 0], covariance
/// blockdiag(diag(first.sigma2), velocity covariance of the label), uniform weights.
ParticleSet init_filter(const FilterModel& model, const AmjpfConfig& cfg,
                        const LatentFrame& first, Rng& rng);

/// Discrete jump through T, then the unscented prediction of each particle
/// through mu' = mu + v, mu_dot' = v with v from the new label's network, plus
/// blockdiag(W, W) process noise.
void predict_step(ParticleSet& particles, const FilterModel& model, const AmjpfConfig& cfg,
                  Rng& rng);

/// Kalman update against the encoded observation with Sigma = diag(obs.sigma2).
/// Returns each particle's innovation score.
std::vector<double> update_step(ParticleSet& particles, const LatentFrame& obs);

/// Mean absolute difference of updated and predicted latent means.
double innovation_score(const Particle& p, std::size_t latent_dim);

struct AnomalyStep {
  double y = 0.0;
  std::size_t winning_label = 0;
  bool weights_reset = false;
};

/// y = min over particles of the innovation score; reweights by exp(-y_p / tau)
/// and applies systematic resampling.
AnomalyStep anomaly_and_resample(ParticleSet& particles, const AmjpfConfig& cfg, Rng& rng);

/// Population mean + 3 population standard deviations. Needs >= 2 values.
double calibrate_threshold(std::span<const double> signal);

/// Clears maximal runs of true shorter than `window`.
std::vector<bool> window_filter(const std::vector<bool>& flags, std::size_t window);

struct AnomalyReport {
  std::vector<std::size_t> frame;  // index of the scored frame (1 .. n-1)
  std::vector<double> y;
  double threshold = 0.0;
  std::vector<bool> raw_flag;
  std::vector<bool> final_flag;
  std::vector<std::size_t> winning_cluster;
  std::size_t weight_resets = 0;

  std::size_t size() const { return y.size(); }
  friend bool operator==(const AnomalyReport&, const AnomalyReport&) = default;
};

/// Runs the filter over a latent sequence and applies the threshold and window rule.
AnomalyReport score_sequence(const FilterModel& model, std::span<const LatentFrame> latents,
                             const AmjpfConfig& cfg, double threshold);

}  // namespace lmj
