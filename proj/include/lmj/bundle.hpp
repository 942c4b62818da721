#pragma once

#include <cstddef>
#include <filesystem>

#include "lmj/amjpf.hpp"
#include "lmj/vae.hpp"

namespace lmj {

/// Values fixed when the training sequence is scored.
struct Calibration {
  double threshold = 0.0;
  AmjpfConfig filter;
  friend bool operator==(const Calibration& a, const Calibration& b) {
    return a.threshold == b.threshold && a.filter.particles == b.filter.particles &&
           a.filter.ukf == b.filter.ukf && a.filter.tau == b.filter.tau &&
           a.filter.window == b.filter.window && a.filter.seed == b.filter.seed;
  }
};

/// A trained model on disk:
///
///   <dir>/vae/manifest.txt, encoder_layer<i>.bin, decoder_layer<i>.bin
///   <dir>/clusters/manifest.txt, centroids.bin, covariances.bin, radii.bin, transitions.bin
///   <dir>/dynamics/cluster_<s>/manifest.txt, layer<i>.bin, noise.bin
///   <dir>/calibration.txt
struct ModelBundle {
  VaeParams vae;
  std::size_t frame_width = 0;
  std::size_t frame_height = 0;
  std::uint64_t vae_seed = 0;
  FilterModel filter;
  Calibration calibration;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

void save_vae(const std::filesystem::path& dir, const VaeParams& vae, std::size_t width,
              std::size_t height, std::uint64_t seed);
void load_vae(const std::filesystem::path& dir, ModelBundle& into);

void save_clusters(const std::filesystem::path& dir, const ClusterModel& m,
                   const TransitionMatrix& t);
void load_clusters(const std::filesystem::path& dir, ClusterModel& m, TransitionMatrix& t);

void save_dynamics(const std::filesystem::path& dir, const DynamicsNet& d);
DynamicsNet load_dynamics(const std::filesystem::path& dir);

void save_calibration(const std::filesystem::path& path, const Calibration& c);
Calibration load_calibration(const std::filesystem::path& path);

void save_bundle(const std::filesystem::path& dir, const ModelBundle& b);
/// Throws InvalidInput naming the missing part when the bundle is incomplete.
ModelBundle load_bundle(const std::filesystem::path& dir);

}  // namespace lmj
