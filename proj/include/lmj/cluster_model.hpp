#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmj/generalized_state.hpp"
#include "lmj/matrix.hpp"

namespace lmj {

/// Discrete regimes found by k-means over standardized generalized states.
///
/// Centroids, covariances and radii live in the standardized feature space;
/// `feature_mean` and `feature_scale` map raw [mu; mu_dot] vectors into it.
struct ClusterModel {
  std::size_t latent_dim = 0;
  Vector feature_mean;
  Vector feature_scale;
  std::vector<Vector> centroids;
  std::vector<Matrix> covariances;
  Vector radii;
  std::vector<std::size_t> member_counts;

  std::size_t cluster_count() const { return centroids.size(); }
  Vector standardize(std::span<const double> raw) const;
  /// Covariance of cluster s mapped back to raw feature units.
  Matrix raw_covariance(std::size_t s) const;
  /// Raw-unit L x L covariance of the velocity (mu_dot) block of cluster s.
  Matrix raw_velocity_covariance(std::size_t s) const;
  /// Empirical member frequencies.
  Vector priors() const;

  friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

struct KMeansFit {
  ClusterModel model;
  std::vector<std::size_t> labels;     // training assignment, aligned with the input
  std::vector<double> objective_trace;  // objective after each assignment step
  std::size_t iterations = 0;
};

inline constexpr std::size_t kMaxLloydIterations = 300;

/// k-means++ seeding then Lloyd iterations to an assignment fixpoint (at most
/// 300). An empty cluster is re-seeded at the point farthest from its
/// centroid. Throws InvalidInput for C == 0 or fewer points than clusters.
KMeansFit kmeans_fit(std::span<const GeneralizedState> gs, std::size_t clusters,
                     std::uint64_t seed);

struct Assignment {
  std::size_t label = 0;
  double distance = 0.0;
};

/// Nearest centroid in standardized space; ties go to the lowest index.
Assignment assign_cluster(const ClusterModel& m, const GeneralizedState& gs);
Assignment nearest_centroid(std::span<const Vector> centroids, std::span<const double> point);

struct TransitionMatrix {
  Matrix probabilities;  // row-stochastic, C x C
  double smoothing = 0.0;

  std::size_t size() const { return probabilities.rows(); }
  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

/// T[i][j] = (count(i->j) + eps) / (sum_j count(i->j) + C eps); rows with no
/// outgoing transitions are uniform.
TransitionMatrix estimate_transitions(std::span<const std::size_t> labels, std::size_t clusters,
                                      double smoothing);

}  // namespace lmj
