#include "lmj/bundle.hpp"

#include <string>

#include "lmj/error.hpp"
#include "lmj/io.hpp"

namespace fs = std::filesystem;

namespace lmj {

namespace {

void require(const fs::path& p) {
  if (!fs::exists(p)) throw InvalidInput("model bundle is missing " + p.string());
}

void save_mlp_layers(const fs::path& dir, const std::string& prefix, const MlpParams& p) {
  for (std::size_t l = 0; l < p.layer_count(); ++l)
    write_layer(dir / (prefix + std::to_string(l) + ".bin"), p.weights[l], p.biases[l]);
}

MlpParams load_mlp_layers(const fs::path& dir, const std::string& prefix,
                          std::vector<std::size_t> sizes, Activation act) {
  MlpParams p = zero_mlp(std::move(sizes), act);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const fs::path file = dir / (prefix + std::to_string(l) + ".bin");
    require(file);
    read_layer(file, p.weights[l], p.biases[l]);
  }
  p.validate();
  return p;
}

Matrix row_matrix(const Vector& v) { return Matrix::from_rows(1, v.size(), v); }

}  // namespace

void save_vae(const fs::path& dir, const VaeParams& vae, std::size_t width, std::size_t height,
              std::uint64_t seed) {
  fs::create_directories(dir);
  KeyValueFile kv;
  kv.set("latent_dim", std::to_string(vae.latent_dim));
  kv.set("activation", std::string(activation_name(vae.encoder.activation)));
  kv.set("seed", std::to_string(seed));
  kv.set("frame_width", std::to_string(width));
  kv.set("frame_height", std::to_string(height));
  kv.set("encoder_sizes", join_counts(vae.encoder.sizes));
  kv.set("decoder_sizes", join_counts(vae.decoder.sizes));
  kv.save(dir / "manifest.txt");
  save_mlp_layers(dir, "encoder_layer", vae.encoder);
  save_mlp_layers(dir, "decoder_layer", vae.decoder);
}

void load_vae(const fs::path& dir, ModelBundle& into) {
  require(dir / "manifest.txt");
  const KeyValueFile kv = KeyValueFile::load(dir / "manifest.txt");
  const Activation act = parse_activation(kv.get("activation"));
  into.vae.latent_dim = parse_count(kv.get("latent_dim"));
  into.vae.encoder = load_mlp_layers(dir, "encoder_layer", split_counts(kv.get("encoder_sizes")), act);
  into.vae.decoder = load_mlp_layers(dir, "decoder_layer", split_counts(kv.get("decoder_sizes")), act);
  into.vae.validate();
  into.frame_width = parse_count(kv.get("frame_width"));
  into.frame_height = parse_count(kv.get("frame_height"));
  into.vae_seed = parse_count(kv.get("seed"));
}

void save_clusters(const fs::path& dir, const ClusterModel& m, const TransitionMatrix& t) {
  fs::create_directories(dir);
  KeyValueFile kv;
  kv.set("clusters", std::to_string(m.cluster_count()));
  kv.set("latent_dim", std::to_string(m.latent_dim));
  kv.set("smoothing", format_double(t.smoothing));
  kv.set("feature_mean", join_doubles(m.feature_mean));
  kv.set("feature_scale", join_doubles(m.feature_scale));
  kv.set("member_counts", join_counts(m.member_counts));
  kv.save(dir / "manifest.txt");

  std::vector<Matrix> centroids;
  for (const auto& c : m.centroids) centroids.push_back(row_matrix(c));
  write_matrix_block(dir / "centroids.bin", centroids);
  write_matrix_block(dir / "covariances.bin", m.covariances);
  write_matrix_block(dir / "radii.bin", std::vector<Matrix>{row_matrix(m.radii)});
  write_matrix_block(dir / "transitions.bin", std::vector<Matrix>{t.probabilities});
}

void load_clusters(const fs::path& dir, ClusterModel& m, TransitionMatrix& t) {
  for (const char* part : {"manifest.txt", "centroids.bin", "covariances.bin", "radii.bin",
                           "transitions.bin"})
    require(dir / part);
  const KeyValueFile kv = KeyValueFile::load(dir / "manifest.txt");
  const std::size_t c = parse_count(kv.get("clusters"));
  m = ClusterModel{};
  m.latent_dim = parse_count(kv.get("latent_dim"));
  m.feature_mean = split_doubles(kv.get("feature_mean"));
  m.feature_scale = split_doubles(kv.get("feature_scale"));
  m.member_counts = split_counts(kv.get("member_counts"));
  for (const Matrix& row : read_matrix_block(dir / "centroids.bin"))
    m.centroids.emplace_back(row.data().begin(), row.data().end());
  m.covariances = read_matrix_block(dir / "covariances.bin");
  const auto radii = read_matrix_block(dir / "radii.bin");
  if (radii.size() != 1) throw InvalidInput("cluster bundle: malformed radii block");
  m.radii.assign(radii.front().data().begin(), radii.front().data().end());
  const auto trans = read_matrix_block(dir / "transitions.bin");
  if (trans.size() != 1) throw InvalidInput("cluster bundle: malformed transition block");
  t.probabilities = trans.front();
  t.smoothing = parse_double(kv.get("smoothing"));

  const std::size_t dim = 2 * m.latent_dim;
  if (m.centroids.size() != c || m.covariances.size() != c || m.radii.size() != c ||
      m.member_counts.size() != c || t.probabilities.rows() != c ||
      m.feature_mean.size() != dim || m.feature_scale.size() != dim)
    throw InvalidInput("cluster bundle: parts disagree on cluster count or dimension");
}

void save_dynamics(const fs::path& dir, const DynamicsNet& d) {
  fs::create_directories(dir);
  KeyValueFile kv;
  kv.set("cluster", std::to_string(d.cluster));
  kv.set("fallback", d.fallback ? "1" : "0");
  kv.set("sizes", join_counts(d.net.sizes));
  kv.set("activation", std::string(activation_name(d.net.activation)));
  kv.save(dir / "manifest.txt");
  save_mlp_layers(dir, "layer", d.net);
  write_matrix_block(dir / "noise.bin", std::vector<Matrix>{row_matrix(d.noise_diag)});
}

DynamicsNet load_dynamics(const fs::path& dir) {
  require(dir / "manifest.txt");
  require(dir / "noise.bin");
  const KeyValueFile kv = KeyValueFile::load(dir / "manifest.txt");
  DynamicsNet d;
  d.cluster = parse_count(kv.get("cluster"));
  d.fallback = parse_count(kv.get("fallback")) != 0;
  d.net = load_mlp_layers(dir, "layer", split_counts(kv.get("sizes")),
                          parse_activation(kv.get("activation")));
  const auto noise = read_matrix_block(dir / "noise.bin");
  if (noise.size() != 1) throw InvalidInput("dynamics bundle: malformed noise block");
  d.noise_diag.assign(noise.front().data().begin(), noise.front().data().end());
  return d;
}

void save_calibration(const fs::path& path, const Calibration& c) {
  KeyValueFile kv;
  kv.set("threshold", format_double(c.threshold));
  kv.set("window", std::to_string(c.filter.window));
  kv.set("ukf_alpha", format_double(c.filter.ukf.alpha));
  kv.set("ukf_beta", format_double(c.filter.ukf.beta));
  kv.set("ukf_kappa", format_double(c.filter.ukf.kappa));
  kv.set("tau", format_double(c.filter.tau));
  kv.set("particles", std::to_string(c.filter.particles));
  kv.set("seed", std::to_string(c.filter.seed));
  kv.save(path);
}

Calibration load_calibration(const fs::path& path) {
  require(path);
  const KeyValueFile kv = KeyValueFile::load(path);
  Calibration c;
  c.threshold = parse_double(kv.get("threshold"));
  c.filter.window = parse_count(kv.get("window"));
  c.filter.ukf = {parse_double(kv.get("ukf_alpha")), parse_double(kv.get("ukf_beta")),
                  parse_double(kv.get("ukf_kappa"))};
  c.filter.tau = parse_double(kv.get("tau"));
  c.filter.particles = parse_count(kv.get("particles"));
  c.filter.seed = parse_count(kv.get("seed"));
  c.filter.validate();
  return c;
}

void save_bundle(const fs::path& dir, const ModelBundle& b) {
  fs::create_directories(dir);
  save_vae(dir / "vae", b.vae, b.frame_width, b.frame_height, b.vae_seed);
  save_clusters(dir / "clusters", b.filter.clusters, b.filter.transitions);
  for (const DynamicsNet& d : b.filter.dynamics)
    save_dynamics(dir / "dynamics" / ("cluster_" + std::to_string(d.cluster)), d);
  save_calibration(dir / "calibration.txt", b.calibration);
}

ModelBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("model bundle directory not found: " + dir.string());
  ModelBundle b;
  load_vae(dir / "vae", b);
  load_clusters(dir / "clusters", b.filter.clusters, b.filter.transitions);
  for (std::size_t s = 0; s < b.filter.clusters.cluster_count(); ++s)
    b.filter.dynamics.push_back(load_dynamics(dir / "dynamics" / ("cluster_" + std::to_string(s))));
  b.calibration = load_calibration(dir / "calibration.txt");
  b.filter.validate();
  if (b.vae.latent_dim != b.filter.latent_dim())
    throw InvalidInput("model bundle: VAE and cluster latent dimensions differ");
  return b;
}

}  // namespace lmj
