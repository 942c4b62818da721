#include "doctest.h"

#include <cmath>
#include <limits>

#include "lmj/cluster_model.hpp"
#include "lmj/error.hpp"
#include "lmj/rng.hpp"

using namespace lmj;

namespace {

GeneralizedState gs(double a, double b, double c, double d) { return {{a, b}, {c, d}}; }

std::vector<GeneralizedState> random_cloud(Rng& rng, std::size_t n) {
  std::vector<GeneralizedState> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(gs(rng.normal(), 3 * rng.normal(), 0.1 * rng.normal(), rng.uniform()));
  return out;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

TEST_CASE("single cluster is the mean of everything") {
  Rng rng(1);
  const auto pts = random_cloud(rng, 40);
  const auto fit = kmeans_fit(pts, 1, 3);
  for (auto l : fit.labels) CHECK(l == 0);
  // standardized features have zero mean, so the only centroid is the origin
  for (double v : fit.model.centroids[0]) CHECK(std::abs(v) < 1e-12);
  // and the scaling vector maps it back to the raw mean
  Vector raw_mean(4, 0.0);
  for (const auto& p : pts) {
    const Vector s = p.stacked();
    for (std::size_t d = 0; d < 4; ++d) raw_mean[d] += s[d] / pts.size();
  }
  for (std::size_t d = 0; d < 4; ++d) CHECK(fit.model.feature_mean[d] == doctest::Approx(raw_mean[d]));
  CHECK(fit.model.member_counts[0] == 40);
  CHECK(fit.model.priors()[0] == 1.0);
}

TEST_CASE("two separated blobs are recovered exactly") {
  Rng rng(2);
  std::vector<GeneralizedState> pts;
  std::vector<int> truth;
  for (int i = 0; i < 60; ++i) {
    const int b = i % 2;
    const double off = b ? 50.0 : -50.0;
    pts.push_back(gs(off + rng.normal(), off + rng.normal(), rng.normal(), rng.normal()));
    truth.push_back(b);
  }
  const auto fit = kmeans_fit(pts, 2, 7);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK((fit.labels[i] == fit.labels[0]) == (truth[i] == truth[0]));
}

TEST_CASE("as many clusters as points") {
  std::vector<GeneralizedState> pts{gs(0, 0, 0, 0), gs(1, 0, 0, 1), gs(0, 2, 1, 0), gs(3, 3, 3, 3)};
  const auto fit = kmeans_fit(pts, 4, 1);
  std::vector<int> seen(4, 0);
  for (auto l : fit.labels) seen[l]++;
  for (int s : seen) CHECK(s == 1);
  for (double r : fit.model.radii) CHECK(r == 0.0);
}

TEST_CASE("kmeans errors") {
  std::vector<GeneralizedState> pts{gs(0, 0, 0, 0), gs(1, 1, 1, 1)};
  CHECK_THROWS_AS(kmeans_fit(pts, 3, 1), InvalidInput);
  CHECK_THROWS_AS(kmeans_fit(pts, 0, 1), InvalidInput);
}

TEST_CASE("kmeans invariants on random data") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pts = random_cloud(rng, 30 + rng.below(60));
    const std::size_t c = 1 + rng.below(6);
    const auto fit = kmeans_fit(pts, c, rep);
    const auto again = kmeans_fit(pts, c, rep);
    CHECK(fit.model == again.model);
    CHECK(fit.labels == again.labels);

    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
      CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] * (1 + 1e-12));

    std::size_t total = 0;
    for (auto m : fit.model.member_counts) total += m;
    CHECK(total == pts.size());

    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto a = assign_cluster(fit.model, pts[i]);
      CHECK(a.label == fit.labels[i]);
      CHECK(a.distance <= fit.model.radii[a.label] + 1e-12);
    }
    for (const auto& q : fit.model.covariances) {
      CHECK(q == symmetrized(q));
      CHECK_NOTHROW(matrix_sqrt_psd(q));
    }
  }
}

TEST_CASE("covariance is the sample covariance of members plus 1e-9 I") {
  Rng rng(4);
  const auto pts = random_cloud(rng, 25);
  const auto fit = kmeans_fit(pts, 1, 0);
  const auto& m = fit.model;
  std::vector<Vector> z;
  for (const auto& p : pts) z.push_back(m.standardize(p.stacked()));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (const auto& v : z) s += v[i] * v[j];  // mean is zero
      const double want = s / (z.size() - 1) + (i == j ? 1e-9 : 0.0);
      CHECK(m.covariances[0](i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  // unit variance after standardization (population)
  for (std::size_t d = 0; d < 4; ++d) {
    double s = 0.0;
    for (const auto& v : z) s += v[d] * v[d];
    CHECK(s / z.size() == doctest::Approx(1.0));
  }
}

TEST_CASE("constant feature dimension does not divide by zero") {
  std::vector<GeneralizedState> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(gs(i, 5, -i, 0));
  const auto fit = kmeans_fit(pts, 2, 1);
  CHECK(fit.model.feature_scale[1] == 1.0);
  CHECK(fit.model.feature_scale[3] == 1.0);
  for (const auto& c : fit.model.centroids) CHECK(all_finite(c));
}

TEST_CASE("assignment: exact hit, tie rule and linear scan") {
  const std::vector<Vector> cents{{0, 0}, {1, 0}, {5, 5}, {-1, 0}};
  auto a = nearest_centroid(cents, Vector{5, 5});
  CHECK(a.label == 2);
  CHECK(a.distance == 0.0);
  // equidistant between 1 and 3
  a = nearest_centroid(std::vector<Vector>{{9, 9}, {1, 0}, {9, 8}, {-1, 0}}, Vector{0, 0});
  CHECK(a.label == 1);
  CHECK(a.distance == 1.0);

  Rng rng(5);
  std::vector<Vector> many;
  for (int i = 0; i < 12; ++i) many.push_back({rng.normal(), rng.normal(), rng.normal()});
  for (int t = 0; t < 200; ++t) {
    const Vector p{rng.normal(), rng.normal(), rng.normal()};
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < many.size(); ++i) {
      const double d = sq_dist(many[i], p);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    const auto got = nearest_centroid(many, p);
    CHECK(got.label == best);
    CHECK(got.distance == doctest::Approx(std::sqrt(bd)));
  }
}

TEST_CASE("transitions hand cases") {
  const std::vector<std::size_t> l{0, 0, 0, 1};
  const auto t = estimate_transitions(l, 2, 0.0);
  CHECK(t.probabilities(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(t.probabilities(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(t.probabilities(1, 0) == 0.5);
  CHECK(t.probabilities(1, 1) == 0.5);

  const auto r = estimate_transitions(std::vector<std::size_t>{2, 2, 2}, 3, 0.0);
  CHECK(r.probabilities(2, 2) == 1.0);

  CHECK_THROWS_AS(estimate_transitions(std::vector<std::size_t>{0, 3}, 3, 0.0), InvalidInput);
  CHECK_THROWS_AS(estimate_transitions(std::vector<std::size_t>{0}, 3, 0.0), InvalidInput);
  CHECK_THROWS_AS(estimate_transitions(std::vector<std::size_t>{0, 1}, 3, -1.0), InvalidInput);
}

TEST_CASE("transitions match a bigram counter and stay row-stochastic") {
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t c = 1 + rng.below(7);
    std::vector<std::size_t> l(2 + rng.below(200));
    for (auto& v : l) v = rng.below(c);
    const double eps = rep % 3 == 0 ? 0.0 : rng.uniform();
    const auto t = estimate_transitions(l, c, eps);
    std::vector<std::vector<double>> count(c, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i + 1 < l.size(); ++i) count[l[i]][l[i + 1]] += 1.0;
    for (std::size_t i = 0; i < c; ++i) {
      double row = 0.0, sum = 0.0;
      for (double v : count[i]) row += v;
      for (std::size_t j = 0; j < c; ++j) {
        const double want = row == 0.0 ? 1.0 / c : (count[i][j] + eps) / (row + c * eps);
        CHECK(t.probabilities(i, j) == doctest::Approx(want).epsilon(1e-13));
        CHECK(t.probabilities(i, j) >= 0.0);
        sum += t.probabilities(i, j);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}
