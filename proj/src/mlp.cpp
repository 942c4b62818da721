#include "lmj/mlp.hpp"

#include <cmath>
#include <string>

#include "lmj/error.hpp"
#include "lmj/kernels.hpp"

namespace lmj {

namespace {

void apply_activation(Activation a, std::span<double> v) {
  switch (a) {
    case Activation::kTanh:
      for (double& x : v) x = std::tanh(x);
      break;
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kIdentity:
      break;
  }
}

// Derivative expressed through the activation output.
double activation_slope(Activation a, double out) {
  switch (a) {
    case Activation::kTanh:
      return 1.0 - out * out;
    case Activation::kRelu:
      return out > 0.0 ? 1.0 : 0.0;
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

void require_finite(const MlpGradient& g) {
  for (const auto& w : g.weights)
    if (!all_finite(w.data())) throw NumericDomain("non-finite gradient entry");
  for (const auto& b : g.biases)
    if (!all_finite(b)) throw NumericDomain("non-finite gradient entry");
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidInput("unknown activation '" + std::string(name) + "'");
}

void MlpParams::validate() const {
  if (sizes.size() < 2) throw InvalidInput("MlpParams: need at least one layer");
  if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1)
    throw InvalidInput("MlpParams: layer count does not match sizes");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != sizes[l + 1] || weights[l].cols() != sizes[l] ||
        biases[l].size() != sizes[l + 1])
      throw InvalidInput("MlpParams: layer " + std::to_string(l) + " does not chain");
    if (!all_finite(weights[l].data()) || !all_finite(biases[l]))
      throw InvalidInput("MlpParams: non-finite parameter in layer " + std::to_string(l));
  }
}

MlpParams zero_mlp(std::vector<std::size_t> sizes, Activation activation) {
  if (sizes.size() < 2) throw InvalidInput("zero_mlp: need at least one layer");
  MlpParams p;
  p.activation = activation;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    p.weights.emplace_back(sizes[l + 1], sizes[l]);
    p.biases.emplace_back(sizes[l + 1], 0.0);
  }
  p.sizes = std::move(sizes);
  return p;
}

MlpParams init_mlp(std::vector<std::size_t> sizes, Activation activation, Rng& rng) {
  MlpParams p = zero_mlp(std::move(sizes), activation);
  for (auto& w : p.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& v : w.data()) v = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return p;
}

MlpGradient zero_gradient(const MlpParams& p) {
  MlpGradient g;
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    g.weights.emplace_back(p.weights[l].rows(), p.weights[l].cols());
    g.biases.emplace_back(p.biases[l].size(), 0.0);
  }
  return g;
}

MlpTrace mlp_forward_trace(const MlpParams& p, std::span<const double> x) {
  if (x.size() != p.input_size())
    throw InvalidInput("mlp_forward: input length " + std::to_string(x.size()) + ", expected " +
                       std::to_string(p.input_size()));
  const auto& k = kernels::active();
  MlpTrace t;
  t.activations.reserve(p.layer_count() + 1);
  t.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const Matrix& w = p.weights[l];
    Vector out(w.rows());
    k.gemv(w.data().data(), w.rows(), w.cols(), t.activations.back().data(), p.biases[l].data(),
           out.data());
    if (l + 1 < p.layer_count()) apply_activation(p.activation, out);
    t.activations.push_back(std::move(out));
  }
  return t;
}

Vector mlp_forward(const MlpParams& p, std::span<const double> x) {
  return std::move(mlp_forward_trace(p, x).activations.back());
}

Vector mlp_backward(const MlpParams& p, const MlpTrace& trace,
                    std::span<const double> output_adjoint, MlpGradient& grad) {
  if (output_adjoint.size() != p.output_size())
    throw InvalidInput("mlp_backward: adjoint length mismatch");
  const auto& k = kernels::active();
  Vector delta(output_adjoint.begin(), output_adjoint.end());
  for (std::size_t l = p.layer_count(); l-- > 0;) {
    if (l + 1 < p.layer_count()) {
      const Vector& out = trace.activations[l + 1];
      for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] *= activation_slope(p.activation, out[i]);
    }
    const Matrix& w = p.weights[l];
    const Vector& in = trace.activations[l];
    k.outer_acc(grad.weights[l].data().data(), w.rows(), w.cols(), delta.data(), in.data());
    for (std::size_t i = 0; i < delta.size(); ++i) grad.biases[l][i] += delta[i];
    Vector prev(w.cols(), 0.0);
    k.gemv_t_acc(w.data().data(), w.rows(), w.cols(), delta.data(), prev.data());
    delta = std::move(prev);
  }
  return delta;
}

MlpGradient mlp_grad(const MlpParams& p, std::span<const double> x,
                     std::span<const double> target) {
  if (target.size() != p.output_size())
    throw InvalidInput("mlp_grad: target length " + std::to_string(target.size()) +
                       ", expected " + std::to_string(p.output_size()));
  const MlpTrace t = mlp_forward_trace(p, x);
  Vector residual(t.output());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= target[i];
  MlpGradient g = zero_gradient(p);
  mlp_backward(p, t, residual, g);
  return g;
}

void accumulate(MlpGradient& g, const MlpGradient& other, double s) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    kernels::axpy(s, other.weights[l].data(), g.weights[l].data());
    kernels::axpy(s, other.biases[l], g.biases[l]);
  }
}

void scale(MlpGradient& g, double s) {
  for (auto& w : g.weights) w *= s;
  for (auto& b : g.biases)
    for (double& v : b) v *= s;
}

void sgd_step_inplace(MlpParams& p, const MlpGradient& g, double lr) {
  if (!(lr > 0.0)) throw InvalidInput("sgd_step: learning rate must be positive");
  require_finite(g);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    kernels::axpy(-lr, g.weights[l].data(), p.weights[l].data());
    kernels::axpy(-lr, g.biases[l], p.biases[l]);
  }
}

MlpParams sgd_step(const MlpParams& p, const MlpGradient& g, double lr) {
  MlpParams out = p;
  sgd_step_inplace(out, g, lr);
  return out;
}

AdamOptimizer::AdamOptimizer(const MlpParams& like, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zero_gradient(like)),
      v_(zero_gradient(like)) {
  if (!(lr > 0.0)) throw InvalidInput("AdamOptimizer: learning rate must be positive");
}

void AdamOptimizer::step(MlpParams& p, const MlpGradient& g) {
  require_finite(g);
  ++step_count_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  auto update = [&](std::span<double> param, std::span<const double> grad, std::span<double> m,
                    std::span<double> v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      param[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  };
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    update(p.weights[l].data(), g.weights[l].data(), m_.weights[l].data(), v_.weights[l].data());
    update(p.biases[l], g.biases[l], m_.biases[l], v_.biases[l]);
  }
}

std::size_t parameter_count(const MlpParams& p) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < p.layer_count(); ++l)
    n += p.weights[l].data().size() + p.biases[l].size();
  return n;
}

double& parameter_at(MlpParams& p, std::size_t index) {
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    auto w = p.weights[l].data();
    if (index < w.size()) return w[index];
    index -= w.size();
    if (index < p.biases[l].size()) return p.biases[l][index];
    index -= p.biases[l].size();
  }
  throw InvalidInput("parameter_at: index out of range");
}

double gradient_at(const MlpGradient& g, std::size_t index) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    auto w = g.weights[l].data();
    if (index < w.size()) return w[index];
    index -= w.size();
    if (index < g.biases[l].size()) return g.biases[l][index];
    index -= g.biases[l].size();
  }
  throw InvalidInput("gradient_at: index out of range");
}

}  // namespace lmj
