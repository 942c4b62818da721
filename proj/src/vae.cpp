#include "lmj/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lmj/error.hpp"

namespace lmj {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct Posterior {
  LatentFrame latent;
  std::vector<bool> clamped;  // sigma^2 hit the floor or ceiling
};

Posterior posterior_from_head(std::span<const double> head, std::size_t l) {
  Posterior post;
  post.latent.mu.assign(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(l));
  post.latent.sigma2.resize(l);
  post.clamped.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    const double s2 = std::exp(head[l + i]);
    const double c = std::clamp(s2, kSigma2Floor, kSigma2Ceiling);
    post.latent.sigma2[i] = c;
    post.clamped[i] = !(s2 > kSigma2Floor && s2 < kSigma2Ceiling);
  }
  return post;
}

void check_frame(const VaeParams& p, const Frame& x) {
  if (x.size() != p.encoder.input_size())
    throw InvalidInput("frame has " + std::to_string(x.size()) + " pixels, encoder expects " +
                       std::to_string(p.encoder.input_size()));
}

}  // namespace

void Frame::validate() const {
  if (pixels.size() != width * height)
    throw InvalidInput("frame pixel count does not match width x height");
  for (double v : pixels)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("frame pixel outside [0, 1]");
}

void VaeParams::validate() const {
  encoder.validate();
  decoder.validate();
  if (latent_dim == 0) throw InvalidInput("VaeParams: latent dimension must be positive");
  if (encoder.output_size() != 2 * latent_dim)
    throw InvalidInput("VaeParams: encoder must produce 2L outputs");
  if (decoder.input_size() != latent_dim)
    throw InvalidInput("VaeParams: decoder must take L inputs");
  if (decoder.output_size() != encoder.input_size())
    throw InvalidInput("VaeParams: decoder output must match frame size");
}

VaeParams init_vae(std::size_t pixels, std::size_t latent_dim,
                   const std::vector<std::size_t>& hidden, Activation activation, Rng& rng) {
  std::vector<std::size_t> enc{pixels};
  enc.insert(enc.end(), hidden.begin(), hidden.end());
  enc.push_back(2 * latent_dim);
  std::vector<std::size_t> dec{latent_dim};
  dec.insert(dec.end(), hidden.rbegin(), hidden.rend());
  dec.push_back(pixels);
  VaeParams p;
  p.latent_dim = latent_dim;
  p.encoder = init_mlp(std::move(enc), activation, rng);
  p.decoder = init_mlp(std::move(dec), activation, rng);
  return p;
}

LatentFrame encode(const VaeParams& p, const Frame& x) {
  check_frame(p, x);
  return posterior_from_head(mlp_forward(p.encoder, x.pixels), p.latent_dim).latent;
}

Vector reparameterize(const LatentFrame& lf, std::span<const double> noise) {
  if (noise.size() != lf.dim()) throw InvalidInput("reparameterize: noise length mismatch");
  Vector z(lf.dim());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = lf.mu[i] + std::sqrt(lf.sigma2[i]) * noise[i];
  return z;
}

Frame decode(const VaeParams& p, std::span<const double> z, std::size_t width,
             std::size_t height) {
  if (z.size() != p.latent_dim)
    throw InvalidInput("decode: latent length " + std::to_string(z.size()) + ", expected " +
                       std::to_string(p.latent_dim));
  if (width * height != p.decoder.output_size())
    throw InvalidInput("decode: frame size does not match decoder output");
  Frame f{width, height, mlp_forward(p.decoder, z)};
  for (double& v : f.pixels) v = sigmoid(v);
  return f;
}

double kl_to_standard_normal(const LatentFrame& lf) {
  double kl = 0.0;
  for (std::size_t i = 0; i < lf.dim(); ++i) {
    const double s2 = lf.sigma2[i];
    kl += 0.5 * (s2 + lf.mu[i] * lf.mu[i] - 1.0 - std::log(s2));
  }
  return kl;
}

ElboTerms elbo_loss(const VaeParams& p, const Frame& x, std::span<const double> noise) {
  check_frame(p, x);
  const LatentFrame lf = encode(p, x);
  const Vector z = reparameterize(lf, noise);
  const Vector logits = mlp_forward(p.decoder, z);
  ElboTerms t;
  t.kl = kl_to_standard_normal(lf);
  for (std::size_t i = 0; i < logits.size(); ++i)
    t.recon += softplus(logits[i]) - x.pixels[i] * logits[i];
  t.loss = t.kl + t.recon;
  if (!std::isfinite(t.loss)) throw NumericDomain("elbo_loss: non-finite loss");
  return t;
}

ElboTerms elbo_grad(const VaeParams& p, const Frame& x, std::span<const double> noise,
                    VaeGradient& grad) {
  check_frame(p, x);
  const std::size_t l = p.latent_dim;
  if (noise.size() != l) throw InvalidInput("elbo_grad: noise length mismatch");

  const MlpTrace enc = mlp_forward_trace(p.encoder, x.pixels);
  const Posterior post = posterior_from_head(enc.output(), l);
  const LatentFrame& lf = post.latent;
  const Vector z = reparameterize(lf, noise);
  const MlpTrace dec = mlp_forward_trace(p.decoder, z);
  const Vector& logits = dec.output();

  ElboTerms t;
  t.kl = kl_to_standard_normal(lf);
  Vector dlogits(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    t.recon += softplus(logits[i]) - x.pixels[i] * logits[i];
    dlogits[i] = sigmoid(logits[i]) - x.pixels[i];
  }
  t.loss = t.kl + t.recon;
  if (!std::isfinite(t.loss)) throw NumericDomain("elbo_grad: non-finite loss");

  const Vector dz = mlp_backward(p.decoder, dec, dlogits, grad.decoder);
  Vector dhead(2 * l, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    // Reconstruction path through z = mu + exp(logvar / 2) * noise, plus KL.
    dhead[i] = dz[i] + lf.mu[i];
    if (!post.clamped[i]) {
      const double sigma = std::sqrt(lf.sigma2[i]);
      dhead[l + i] = dz[i] * 0.5 * sigma * noise[i] + 0.5 * (lf.sigma2[i] - 1.0);
    }
  }
  mlp_backward(p.encoder, enc, dhead, grad.encoder);
  return t;
}

VaeTrainResult train_vae(std::span<const Frame> frames, const VaeTrainConfig& cfg) {
  if (frames.empty()) throw InvalidInput("train_vae: no frames");
  if (cfg.epochs == 0 || cfg.batch_size == 0 || cfg.latent_dim == 0)
    throw InvalidInput("train_vae: epochs, batch size and latent dimension must be positive");
  const std::size_t pixels = frames.front().size();
  for (const Frame& f : frames) {
    f.validate();
    if (f.size() != pixels) throw InvalidInput("train_vae: frames differ in size");
  }

  Rng rng(cfg.seed);
  VaeTrainResult result;
  result.params = init_vae(pixels, cfg.latent_dim, cfg.hidden, cfg.activation, rng);
  VaeParams& p = result.params;

  AdamOptimizer adam_enc(p.encoder, cfg.learning_rate);
  AdamOptimizer adam_dec(p.decoder, cfg.learning_rate);

  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vector noise(cfg.latent_dim);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      VaeGradient grad{zero_gradient(p.encoder), zero_gradient(p.decoder)};
      double batch_loss = 0.0;
      try {
        for (std::size_t b = start; b < stop; ++b) {
          for (double& e : noise) e = rng.normal();
          batch_loss += elbo_grad(p, frames[order[b]], noise, grad).loss;
        }
        const double inv = 1.0 / static_cast<double>(stop - start);
        scale(grad.encoder, inv);
        scale(grad.decoder, inv);
        if (cfg.optimizer == Optimizer::kAdam) {
          adam_enc.step(p.encoder, grad.encoder);
          adam_dec.step(p.decoder, grad.decoder);
        } else {
          sgd_step_inplace(p.encoder, grad.encoder, cfg.learning_rate);
          sgd_step_inplace(p.decoder, grad.decoder, cfg.learning_rate);
        }
        result.step_losses.push_back(batch_loss * inv);
      } catch (const NumericDomain& e) {
        throw TrainingFailure("train_vae: diverged in epoch " + std::to_string(epoch) + ": " +
                              e.what());
      }
    }
  }
  return result;
}

}  // namespace lmj
