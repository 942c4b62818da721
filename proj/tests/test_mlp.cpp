#include "doctest.h"

#include <cmath>

#include "lmj/error.hpp"
#include "lmj/mlp.hpp"
#include "lmj/rng.hpp"

using namespace lmj;

namespace {

double half_sq_loss(const MlpParams& p, const Vector& x, const Vector& t) {
  const Vector y = mlp_forward(p, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - t[i]) * (y[i] - t[i]);
  return s;
}

Vector random_vec(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

// Biases start at zero; perturb them so their gradients are exercised.
MlpParams random_net(std::vector<std::size_t> sizes, Activation a, Rng& rng) {
  MlpParams p = init_mlp(std::move(sizes), a, rng);
  for (auto& b : p.biases)
    for (double& v : b) v = 0.3 * (rng.uniform() - 0.5);
  return p;
}

}  // namespace

TEST_CASE("forward trivial cases") {
  MlpParams z = zero_mlp({3, 4, 2}, Activation::kIdentity);
  CHECK(mlp_forward(z, Vector{1, 2, 3}) == Vector{0, 0});

  MlpParams id = zero_mlp({3, 3}, Activation::kIdentity);
  id.weights[0] = Matrix::identity(3);
  CHECK(mlp_forward(id, Vector{1, -2, 3}) == Vector{1, -2, 3});

  CHECK_THROWS_AS(mlp_forward(id, Vector{1, 2}), InvalidInput);
}

TEST_CASE("two-layer tanh net matches hand-unrolled layers") {
  Rng rng(42);
  MlpParams p = random_net({3, 5, 2}, Activation::kTanh, rng);
  const Vector x{0.3, -0.7, 1.1};
  Vector h(5), y(2);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = p.biases[0][i];
    for (std::size_t j = 0; j < 3; ++j) s += p.weights[0](i, j) * x[j];
    h[i] = std::tanh(s);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    double s = p.biases[1][i];
    for (std::size_t j = 0; j < 5; ++j) s += p.weights[1](i, j) * h[j];
    y[i] = s;
  }
  const Vector got = mlp_forward(p, x);
  for (std::size_t i = 0; i < 2; ++i) CHECK(got[i] == doctest::Approx(y[i]).epsilon(1e-14));
}

TEST_CASE("gradient hand cases") {
  MlpParams p = zero_mlp({1, 1}, Activation::kIdentity);
  p.weights[0](0, 0) = 2.0;
  MlpGradient g = mlp_grad(p, Vector{1.0}, Vector{0.0});
  CHECK(g.weights[0](0, 0) == doctest::Approx(2.0));
  CHECK(g.biases[0][0] == doctest::Approx(2.0));

  // zero residual
  MlpGradient z = mlp_grad(p, Vector{1.0}, Vector{2.0});
  CHECK(z.weights[0](0, 0) == 0.0);
  CHECK(z.biases[0][0] == 0.0);

  CHECK_THROWS_AS(mlp_grad(p, Vector{1.0}, Vector{1.0, 2.0}), InvalidInput);
}

TEST_CASE("gradient matches central differences for nets up to 3 layers") {
  Rng rng(7);
  const double h = 1e-5;
  for (Activation a : {Activation::kTanh, Activation::kIdentity, Activation::kRelu}) {
    for (auto sizes : std::vector<std::vector<std::size_t>>{{4, 3}, {5, 16, 3}, {6, 16, 16, 4}}) {
      MlpParams p = random_net(sizes, a, rng);
      const Vector x = random_vec(rng, sizes.front());
      const Vector t = random_vec(rng, sizes.back());
      const MlpGradient g = mlp_grad(p, x, t);
      for (std::size_t i = 0; i < parameter_count(p); ++i) {
        MlpParams q = p;
        double& w = parameter_at(q, i);
        const double w0 = w;
        w = w0 + h;
        const double lp = half_sq_loss(q, x, t);
        w = w0 - h;
        const double lm = half_sq_loss(q, x, t);
        const double fd = (lp - lm) / (2.0 * h);
        const double an = gradient_at(g, i);
        // relu kinks make single coordinates non-differentiable; tolerate an absolute floor
        CHECK(std::abs(an - fd) <= 1e-4 * std::max(std::abs(fd), 1e-3));
      }
    }
  }
}

TEST_CASE("sgd step") {
  MlpParams p = zero_mlp({1, 1}, Activation::kIdentity);
  p.weights[0](0, 0) = 1.0;
  MlpGradient g = zero_gradient(p);
  CHECK(sgd_step(p, g, 0.1) == p);
  g.weights[0](0, 0) = 0.5;
  CHECK(sgd_step(p, g, 0.1).weights[0](0, 0) == doctest::Approx(0.95).epsilon(1e-15));

  CHECK_THROWS_AS(sgd_step(p, g, 0.0), InvalidInput);
  CHECK_THROWS_AS(sgd_step(p, g, -1.0), InvalidInput);
  g.biases[0][0] = NAN;
  CHECK_THROWS_AS(sgd_step(p, g, 0.1), NumericDomain);
}

TEST_CASE("100 sgd steps on a convex quadratic strictly decrease the loss") {
  // Linear least squares: convex in the parameters.
  Rng rng(3);
  MlpParams p = random_net({3, 2}, Activation::kIdentity, rng);
  const Vector x{0.5, -1.0, 2.0}, t{1.0, -1.0};
  double prev = half_sq_loss(p, x, t);
  for (int i = 0; i < 100; ++i) {
    p = sgd_step(p, mlp_grad(p, x, t), 0.002);
    const double cur = half_sq_loss(p, x, t);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("adam reduces a regression loss") {
  Rng rng(11);
  MlpParams p = init_mlp({2, 8, 1}, Activation::kTanh, rng);
  AdamOptimizer opt(p, 1e-2);
  std::vector<Vector> xs;
  for (int i = 0; i < 32; ++i) xs.push_back(random_vec(rng, 2));
  auto loss = [&] {
    double s = 0.0;
    for (const auto& x : xs) s += half_sq_loss(p, x, Vector{x[0] * x[1]});
    return s;
  };
  const double before = loss();
  for (int epoch = 0; epoch < 200; ++epoch) {
    MlpGradient g = zero_gradient(p);
    for (const auto& x : xs) accumulate(g, mlp_grad(p, x, Vector{x[0] * x[1]}));
    scale(g, 1.0 / xs.size());
    opt.step(p, g);
  }
  CHECK(loss() < 0.2 * before);
}

TEST_CASE("backward returns the input adjoint") {
  Rng rng(5);
  MlpParams p = random_net({3, 6, 2}, Activation::kTanh, rng);
  const Vector x{0.2, -0.4, 0.9};
  const Vector adj{1.0, -0.5};
  MlpGradient g = zero_gradient(p);
  const Vector dx = mlp_backward(p, mlp_forward_trace(p, x), adj, g);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 3; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Vector yp = mlp_forward(p, xp), ym = mlp_forward(p, xm);
    const double fd = (adj[0] * (yp[0] - ym[0]) + adj[1] * (yp[1] - ym[1])) / (2 * h);
    CHECK(dx[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("validate and activation names") {
  MlpParams p = zero_mlp({2, 2}, Activation::kTanh);
  p.weights[0](0, 0) = INFINITY;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  for (Activation a : {Activation::kTanh, Activation::kRelu, Activation::kIdentity})
    CHECK(parse_activation(activation_name(a)) == a);
  CHECK_THROWS_AS(parse_activation("swish"), InvalidInput);
}
