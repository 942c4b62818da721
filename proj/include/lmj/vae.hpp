#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmj/matrix.hpp"
#include "lmj/mlp.hpp"

namespace lmj {

/// Grayscale frame with pixels in [0, 1], row-major.
struct Frame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  std::size_t size() const { return pixels.size(); }
  /// Throws InvalidInput if the pixel count or range is wrong.
  void validate() const;
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Per-frame latent Gaussian: mean and diagonal variance.
struct LatentFrame {
  Vector mu;
  Vector sigma2;
  std::size_t dim() const { return mu.size(); }
  friend bool operator==(const LatentFrame&, const LatentFrame&) = default;
};

inline constexpr double kSigma2Floor = 1e-8;
inline constexpr double kSigma2Ceiling = 1e8;

/// Encoder outputs [mu; log sigma^2] (2L values); the decoder maps L latent
/// values to pixel logits, squashed by a sigmoid.
struct VaeParams {
  MlpParams encoder;
  MlpParams decoder;
  std::size_t latent_dim = 0;

  void validate() const;
  friend bool operator==(const VaeParams&, const VaeParams&) = default;
};

struct VaeGradient {
  MlpGradient encoder;
  MlpGradient decoder;
};

/// Single-sample negated ELBO and its parts.
struct ElboTerms {
  double loss = 0.0;
  double kl = 0.0;
  double recon = 0.0;
};

VaeParams init_vae(std::size_t pixels, std::size_t latent_dim,
                   const std::vector<std::size_t>& hidden, Activation activation, Rng& rng);

LatentFrame encode(const VaeParams& p, const Frame& x);
/// z = mu + sigma * noise.
Vector reparameterize(const LatentFrame& lf, std::span<const double> noise);
Frame decode(const VaeParams& p, std::span<const double> z, std::size_t width,
             std::size_t height);

/// KL(N(mu, sigma^2) || N(0, I)).
double kl_to_standard_normal(const LatentFrame& lf);

ElboTerms elbo_loss(const VaeParams& p, const Frame& x, std::span<const double> noise);
/// Loss terms plus the gradient of `loss` with respect to every parameter.
ElboTerms elbo_grad(const VaeParams& p, const Frame& x, std::span<const double> noise,
                    VaeGradient& grad);

enum class Optimizer { kSgd, kAdam };

struct VaeTrainConfig {
  std::size_t latent_dim = 8;
  std::vector<std::size_t> hidden{128};
  Activation activation = Activation::kTanh;
  std::size_t epochs = 600;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kSgd;
  std::uint64_t seed = 7;
};

struct VaeTrainResult {
  VaeParams params;
  std::vector<double> step_losses;  // mean per-frame loss of each mini-batch
};

/// Mini-batch training of the negated ELBO. Reproducible from cfg.seed.
/// Throws TrainingFailure naming the epoch when the loss goes non-finite.
VaeTrainResult train_vae(std::span<const Frame> frames, const VaeTrainConfig& cfg);

}  // namespace lmj
