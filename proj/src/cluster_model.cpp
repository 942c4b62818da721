#include "lmj/cluster_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lmj/error.hpp"
#include "lmj/rng.hpp"

namespace lmj {

namespace {

constexpr double kCovarianceJitter = 1e-9;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<Vector> kmeanspp_seed(const std::vector<Vector>& pts, std::size_t c, Rng& rng) {
  std::vector<Vector> centroids;
  centroids.push_back(pts[rng.below(pts.size())]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (centroids.size() < c) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(pts[i], centroids.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      pick = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        run += d2[i];
        if (run > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(pts.size());
    }
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

}  // namespace

Vector ClusterModel::standardize(std::span<const double> raw) const {
  if (raw.size() != feature_mean.size())
    throw InvalidInput("ClusterModel: feature length " + std::to_string(raw.size()) +
                       ", expected " + std::to_string(feature_mean.size()));
  Vector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = (raw[i] - feature_mean[i]) / feature_scale[i];
  return out;
}

Matrix ClusterModel::raw_covariance(std::size_t s) const {
  Matrix m = covariances.at(s);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= feature_scale[i] * feature_scale[j];
  return m;
}

Matrix ClusterModel::raw_velocity_covariance(std::size_t s) const {
  return raw_covariance(s).block(latent_dim, latent_dim, latent_dim, latent_dim);
}

Vector ClusterModel::priors() const {
  double total = 0.0;
  for (std::size_t c : member_counts) total += static_cast<double>(c);
  Vector p(member_counts.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(member_counts[i]) / total;
  return p;
}

Assignment nearest_centroid(std::span<const Vector> centroids, std::span<const double> point) {
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t s = 0; s < centroids.size(); ++s) {
    const double d2 = squared_distance(point, centroids[s]);
    if (d2 < best.distance) best = {s, d2};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

Assignment assign_cluster(const ClusterModel& m, const GeneralizedState& gs) {
  return nearest_centroid(m.centroids, m.standardize(gs.stacked()));
}

KMeansFit kmeans_fit(std::span<const GeneralizedState> gs, std::size_t clusters,
                     std::uint64_t seed) {
  if (clusters == 0) throw InvalidInput("kmeans_fit: cluster count must be positive");
  if (gs.size() < clusters)
    throw InvalidInput("kmeans_fit: " + std::to_string(gs.size()) + " states for " +
                       std::to_string(clusters) + " clusters");
  const std::size_t n = gs.size();
  const std::size_t dim = 2 * gs.front().latent_dim();

  KMeansFit fit;
  ClusterModel& m = fit.model;
  m.latent_dim = gs.front().latent_dim();

  std::vector<Vector> raw;
  raw.reserve(n);
  for (const auto& g : gs) {
    if (g.latent_dim() != m.latent_dim || g.mu_dot.size() != m.latent_dim)
      throw InvalidInput("kmeans_fit: generalized states differ in dimension");
    raw.push_back(g.stacked());
  }

  // Population mean/std per dimension; constant dimensions keep unit scale.
  m.feature_mean.assign(dim, 0.0);
  m.feature_scale.assign(dim, 0.0);
  for (const auto& v : raw)
    for (std::size_t i = 0; i < dim; ++i) m.feature_mean[i] += v[i];
  for (double& v : m.feature_mean) v /= static_cast<double>(n);
  for (const auto& v : raw)
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = v[i] - m.feature_mean[i];
      m.feature_scale[i] += d * d;
    }
  for (double& v : m.feature_scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 1e-12)) v = 1.0;
  }

  std::vector<Vector> pts;
  pts.reserve(n);
  for (const auto& v : raw) pts.push_back(m.standardize(v));

  Rng rng(seed);
  m.centroids = kmeanspp_seed(pts, clusters, rng);

  std::vector<std::size_t> labels(n, std::numeric_limits<std::size_t>::max());
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Assignment a = nearest_centroid(m.centroids, pts[i]);
      changed = changed || a.label != labels[i];
      labels[i] = a.label;
      dist[i] = a.distance;
      objective += a.distance * a.distance;
    }
    fit.objective_trace.push_back(objective);
    fit.iterations = iter + 1;
    if (!changed) break;

    std::vector<Vector> sums(clusters, Vector(dim, 0.0));
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[labels[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[labels[i]][d] += pts[i][d];
    }
    for (std::size_t s = 0; s < clusters; ++s) {
      if (counts[s] > 0) {
        for (std::size_t d = 0; d < dim; ++d)
          m.centroids[s][d] = sums[s][d] / static_cast<double>(counts[s]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (dist[i] > dist[far]) far = i;
      m.centroids[s] = pts[far];
      dist[far] = 0.0;
    }
  }

  m.member_counts.assign(clusters, 0);
  m.radii.assign(clusters, 0.0);
  m.covariances.assign(clusters, Matrix(dim, dim));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = labels[i];
    ++m.member_counts[s];
    m.radii[s] = std::max(m.radii[s], dist[i]);
    Vector dev(dim);
    for (std::size_t d = 0; d < dim; ++d) dev[d] = pts[i][d] - m.centroids[s][d];
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) m.covariances[s](a, b) += dev[a] * dev[b];
  }
  for (std::size_t s = 0; s < clusters; ++s) {
    const double denom = m.member_counts[s] > 1 ? static_cast<double>(m.member_counts[s] - 1) : 1.0;
    m.covariances[s] *= 1.0 / denom;
    for (std::size_t d = 0; d < dim; ++d) m.covariances[s](d, d) += kCovarianceJitter;
  }
  fit.labels = std::move(labels);
  return fit;
}

TransitionMatrix estimate_transitions(std::span<const std::size_t> labels, std::size_t clusters,
                                      double smoothing) {
  if (clusters == 0) throw InvalidInput("estimate_transitions: cluster count must be positive");
  if (labels.size() < 2) throw InvalidInput("estimate_transitions: need at least 2 labels");
  if (!(smoothing >= 0.0)) throw InvalidInput("estimate_transitions: smoothing must be >= 0");
  for (std::size_t s : labels)
    if (s >= clusters)
      throw InvalidInput("estimate_transitions: label " + std::to_string(s) + " out of range");

  Matrix counts(clusters, clusters);
  for (std::size_t k = 0; k + 1 < labels.size(); ++k) counts(labels[k], labels[k + 1]) += 1.0;

  TransitionMatrix t{Matrix(clusters, clusters), smoothing};
  const double c = static_cast<double>(clusters);
  for (std::size_t i = 0; i < clusters; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < clusters; ++j) row += counts(i, j);
    const double denom = row + c * smoothing;
    for (std::size_t j = 0; j < clusters; ++j)
      t.probabilities(i, j) = denom > 0.0 ? (counts(i, j) + smoothing) / denom : 1.0 / c;
  }
  return t;
}

}  // namespace lmj
