#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmj/generalized_state.hpp"
#include "lmj/mlp.hpp"
#include "lmj/vae.hpp"

namespace lmj {

/// Per-cluster velocity model: mu_k -> predicted mu_dot_{k+1}.
///
/// A fallback model carries no trained network and predicts constant velocity;
/// its noise comes from the cluster's velocity covariance.
struct DynamicsNet {
  std::size_t cluster = 0;
  MlpParams net;
  Vector noise_diag;  // process noise W^(S), diagonal entries >= 1e-9
  bool fallback = false;

  std::size_t latent_dim() const { return noise_diag.size(); }
  Matrix noise() const { return Matrix::diagonal(noise_diag); }
  friend bool operator==(const DynamicsNet&, const DynamicsNet&) = default;
};

struct TrainingPair {
  Vector input;
  Vector target;
};

/// Base and sigma-point-augmented (mu_k -> mu_{k+1} - mu_k) pairs for every
/// member of cluster `cluster` whose frame has a successor. `gs[j]` belongs to
/// frame j + 1 and `labels` is aligned with `gs`.
std::vector<TrainingPair> build_training_pairs(std::span<const LatentFrame> latents,
                                               std::span<const GeneralizedState> gs,
                                               std::span<const std::size_t> labels,
                                               std::size_t cluster, const UkfParams& ukf);

struct DynamicsTrainConfig {
  std::size_t hidden_factor = 4;  // hidden width = factor * L
  Activation activation = Activation::kTanh;
  std::size_t epochs = 150;
  std::size_t batch_size = 32;
  double learning_rate = 3e-3;
  std::uint64_t seed = 11;
  /// Fewer than min_pairs_factor * 2L pairs selects the fallback model.
  std::size_t min_pairs_factor = 10;
};

inline constexpr double kNoiseFloor = 1e-9;

/// Trains N^(S) by squared error; W^(S) is the per-dimension residual variance
/// on the training pairs. `fallback_velocity_cov` (raw-unit velocity block of
/// Q^(S)) supplies the noise when there are too few pairs.
DynamicsNet train_dynamics(std::span<const TrainingPair> pairs, std::size_t cluster,
                           std::size_t latent_dim, const Matrix& fallback_velocity_cov,
                           const DynamicsTrainConfig& cfg);

/// Network output for mu, or `current_velocity` for a fallback model.
Vector predict_velocity(const DynamicsNet& d, std::span<const double> mu,
                        std::span<const double> current_velocity = {});

/// Root-mean-square error of a trained (non-fallback) net over pairs.
double dynamics_rmse(const DynamicsNet& d, std::span<const TrainingPair> pairs);

}  // namespace lmj
