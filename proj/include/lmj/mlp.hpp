#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "lmj/matrix.hpp"
#include "lmj/rng.hpp"

namespace lmj {

enum class Activation { kTanh, kRelu, kIdentity };

std::string_view activation_name(Activation a);
/// Throws InvalidInput on an unknown name.
Activation parse_activation(std::string_view name);

/// Fully connected feed-forward network. Hidden layers use `activation`; the
/// output layer is always the identity.
struct MlpParams {
  std::vector<std::size_t> sizes;  // sizes[0] inputs ... sizes.back() outputs
  std::vector<Matrix> weights;     // weights[l] is sizes[l+1] x sizes[l]
  std::vector<Vector> biases;      // biases[l] has sizes[l+1] entries
  Activation activation = Activation::kTanh;

  std::size_t input_size() const { return sizes.front(); }
  std::size_t output_size() const { return sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }

  /// Throws InvalidInput if layer shapes do not chain or entries are non-finite.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Gradient with the same layout as MlpParams.
struct MlpGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Per-layer values cached by a forward pass for reverse-mode differentiation.
struct MlpTrace {
  std::vector<Vector> activations;  // activations[0] is the input, back() the output
  const Vector& output() const { return activations.back(); }
};

MlpParams zero_mlp(std::vector<std::size_t> sizes, Activation activation);
/// Glorot-uniform weights, zero biases.
MlpParams init_mlp(std::vector<std::size_t> sizes, Activation activation, Rng& rng);

MlpGradient zero_gradient(const MlpParams& p);

Vector mlp_forward(const MlpParams& p, std::span<const double> x);
MlpTrace mlp_forward_trace(const MlpParams& p, std::span<const double> x);

/// Back-propagates `output_adjoint` (dLoss/dOutput) through the traced pass,
/// accumulating parameter gradients into `grad`. Returns dLoss/dInput.
Vector mlp_backward(const MlpParams& p, const MlpTrace& trace,
                    std::span<const double> output_adjoint, MlpGradient& grad);

/// Gradient of 0.5 * ||forward(x) - target||^2.
MlpGradient mlp_grad(const MlpParams& p, std::span<const double> x,
                     std::span<const double> target);

/// g += scale * other
void accumulate(MlpGradient& g, const MlpGradient& other, double scale = 1.0);
void scale(MlpGradient& g, double s);

/// p - lr * g. Throws InvalidInput for lr <= 0, NumericDomain for non-finite g.
MlpParams sgd_step(const MlpParams& p, const MlpGradient& g, double lr);
void sgd_step_inplace(MlpParams& p, const MlpGradient& g, double lr);

/// Adam with bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer(const MlpParams& like, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  /// Throws NumericDomain for non-finite g.
  void step(MlpParams& p, const MlpGradient& g);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  MlpGradient m_;
  MlpGradient v_;
};

// Flat coordinate access over all weights then biases, layer by layer.
std::size_t parameter_count(const MlpParams& p);
double& parameter_at(MlpParams& p, std::size_t index);
double gradient_at(const MlpGradient& g, std::size_t index);

}  // namespace lmj
