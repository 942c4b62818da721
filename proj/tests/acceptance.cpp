// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

#include "lmj/amjpf.hpp"
#include "lmj/cluster_model.hpp"
#include "lmj/generalized_state.hpp"
#include "lmj/io.hpp"
#include "lmj/mlp.hpp"
#include "lmj/pipeline.hpp"
#include "lmj/rng.hpp"
#include "lmj/vae.hpp"

using namespace lmj;
namespace fs = std::filesystem;

namespace {

using EM = Eigen::MatrixXd;
using EV = Eigen::VectorXd;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

EM to_eigen(const Matrix& m) {
  EM e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

EV to_eigen(const Vector& v) { return Eigen::Map<const EV>(v.data(), v.size()); }

Matrix from_eigen(const EM& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ---------------------------------------------------------------------

Outcome kalman_oracle() {
  const std::size_t l = 4;
  const double w = 1e-3;
  Rng rng(101);
  EM a = EM::Random(l, l);
  const EM vel = a * a.transpose() / static_cast<double>(l) + 0.05 * EM::Identity(l, l);

  FilterModel m;
  m.clusters.latent_dim = l;
  m.clusters.feature_mean = Vector(2 * l, 0.0);
  m.clusters.feature_scale = Vector(2 * l, 1.0);
  m.clusters.centroids = {Vector(2 * l, 0.0)};
  m.clusters.covariances = {block_diag(Matrix::identity(l), from_eigen(vel))};
  m.clusters.radii = {1.0};
  m.clusters.member_counts = {1};
  m.transitions.probabilities = Matrix::identity(1);
  DynamicsNet d;
  d.net = zero_mlp({l, l}, Activation::kIdentity);
  d.noise_diag = Vector(l, w);
  d.fallback = true;
  m.dynamics = {d};

  std::vector<LatentFrame> obs;
  for (int k = 0; k <= 100; ++k) {
    LatentFrame f{Vector(l), Vector(l)};
    for (std::size_t i = 0; i < l; ++i) {
      f.mu[i] = std::sin(0.07 * k + 0.5 * i) + 0.05 * rng.normal();
      f.sigma2[i] = 0.01 + 0.1 * rng.uniform();
    }
    obs.push_back(f);
  }

  AmjpfConfig cfg;
  cfg.particles = 1;
  Rng frng(cfg.seed);
  ParticleSet ps = init_filter(m, cfg, obs[0], frng);

  EV x = EV::Zero(2 * l);
  x.head(l) = to_eigen(obs[0].mu);
  EM p = EM::Zero(2 * l, 2 * l);
  p.topLeftCorner(l, l) = to_eigen(obs[0].sigma2).asDiagonal();
  p.bottomRightCorner(l, l) = vel;
  EM f = EM::Identity(2 * l, 2 * l);
  f.topRightCorner(l, l) = EM::Identity(l, l);
  EM h = EM::Zero(l, 2 * l);
  h.leftCols(l) = EM::Identity(l, l);

  double worst = 0.0;
  for (std::size_t k = 1; k < obs.size(); ++k) {
    predict_step(ps, m, cfg, frng);
    update_step(ps, obs[k]);
    x = f * x;
    p = f * p * f.transpose() + w * EM::Identity(2 * l, 2 * l);
    const EM s = h * p * h.transpose() + EM(to_eigen(obs[k].sigma2).asDiagonal());
    const EM gain = p * h.transpose() * s.inverse();
    x += gain * (to_eigen(obs[k].mu) - h * x);
    p = (EM::Identity(2 * l, 2 * l) - gain * h) * p;
    worst = std::max(worst, (to_eigen(ps[0].mean) - x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff());
    worst = std::max(worst, (to_eigen(ps[0].cov) - p).cwiseAbs().maxCoeff() / p.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.2e", worst) + " over 100 steps"};
}

// ---- 2 ---------------------------------------------------------------------

Outcome unscented_exactness() {
  Rng rng(202);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.below(16);
    const std::size_t out = 1 + rng.below(16);
    EM a(n, n), mmap(out, n);
    EV mean(n), c(out);
    for (std::size_t i = 0; i < n; ++i) {
      mean(i) = rng.normal();
      for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.normal();
    }
    for (std::size_t i = 0; i < out; ++i) {
      c(i) = rng.normal();
      for (std::size_t j = 0; j < n; ++j) mmap(i, j) = rng.normal();
    }
    const EM cov = a * a.transpose() / static_cast<double>(n);
    Vector mv(mean.data(), mean.data() + n);
    const auto sp = sigma_points(mv, from_eigen(cov), UkfParams{});
    std::vector<Vector> moved;
    for (const auto& s : sp.points) {
      const EV y = mmap * to_eigen(s) + c;
      moved.emplace_back(y.data(), y.data() + out);
    }
    const Gaussian g = unscented_stats(sp, moved);
    worst = std::max(worst, (to_eigen(g.mean) - (mmap * mean + c)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (to_eigen(g.cov) - mmap * cov * mmap.transpose()).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "max absolute error " + fmt("%.2e", worst) + " over 50 cases"};
}

// ---- 3 ---------------------------------------------------------------------

// Central difference against an analytic value; relative to the larger
// magnitude, with a 1e-6 floor so coordinates with a vanishing gradient
// are judged on absolute error.
double rel_err(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
}

Outcome gradients() {
  Rng rng(303);
  const double h = 1e-5;
  double worst = 0.0;
  std::size_t checked_mlp = 0, checked_elbo = 0;

  MlpParams net = init_mlp({6, 16, 16, 4}, Activation::kTanh, rng);
  for (auto& b : net.biases)
    for (double& v : b) v = 0.2 * rng.normal();
  Vector x(6), t(4);
  for (double& v : x) v = rng.normal();
  for (double& v : t) v = rng.normal();
  auto loss = [&](const MlpParams& p) {
    const Vector y = mlp_forward(p, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - t[i]) * (y[i] - t[i]);
    return s;
  };
  const MlpGradient g = mlp_grad(net, x, t);
  for (std::size_t k = 0; k < 200; ++k) {
    const std::size_t i = rng.below(parameter_count(net));
    MlpParams q = net;
    double& w = parameter_at(q, i);
    const double w0 = w;
    w = w0 + h;
    const double lp = loss(q);
    w = w0 - h;
    const double lm = loss(q);
    worst = std::max(worst, rel_err(gradient_at(g, i), (lp - lm) / (2 * h)));
    ++checked_mlp;
  }

  VaeParams vae = init_vae(64, 4, {16}, Activation::kTanh, rng);
  for (auto& b : vae.encoder.biases)
    for (double& v : b) v = 0.2 * rng.normal();
  Frame frame{8, 8, std::vector<double>(64)};
  for (double& v : frame.pixels) v = rng.uniform();
  const Vector eps{0.3, -1.1, 0.7, 0.05};
  VaeGradient vg{zero_gradient(vae.encoder), zero_gradient(vae.decoder)};
  elbo_grad(vae, frame, eps, vg);
  const std::size_t ne = parameter_count(vae.encoder);
  const std::size_t total = ne + parameter_count(vae.decoder);
  for (std::size_t k = 0; k < 200; ++k) {
    const std::size_t i = rng.below(total);
    VaeParams q = vae;
    double& w = i < ne ? parameter_at(q.encoder, i) : parameter_at(q.decoder, i - ne);
    const double w0 = w;
    w = w0 + h;
    const double lp = elbo_loss(q, frame, eps).loss;
    w = w0 - h;
    const double lm = elbo_loss(q, frame, eps).loss;
    const double an = i < ne ? gradient_at(vg.encoder, i) : gradient_at(vg.decoder, i - ne);
    worst = std::max(worst, rel_err(an, (lp - lm) / (2 * h)));
    ++checked_elbo;
  }
  return {worst <= 1e-4, std::to_string(checked_mlp) + " mlp + " + std::to_string(checked_elbo) +
                             " elbo coordinates, max relative error " + fmt("%.2e", worst)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome unit_conformance() {
  const auto sp = sigma_points(Vector{0.0}, Matrix{{1.0}}, UkfParams{1.0, 0.0, 2.0});
  double e = 0.0;
  e = std::max(e, std::abs(sp.points[1][0] - std::sqrt(3.0)));
  e = std::max(e, std::abs(sp.points[2][0] + std::sqrt(3.0)));
  e = std::max(e, std::abs(calibrate_threshold(std::vector<double>{0.0, 2.0}) - 4.0));
  Particle p;
  p.predicted_mean = {0.0, 0.0};
  p.updated_mean = {0.2, -0.4};
  e = std::max(e, std::abs(innovation_score(p, 2) - 0.3));
  return {e <= 1e-12, "sigma points, threshold and innovation, max error " + fmt("%.1e", e)};
}

// ---- 5 ---------------------------------------------------------------------

Outcome transitions_and_kmeans() {
  Rng rng(505);
  double worst_row = 0.0;
  bool monotone = true;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 40 + rng.below(200);
    const std::size_t l = 1 + rng.below(4);
    std::vector<LatentFrame> lat;
    Vector pos(l, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      LatentFrame f{Vector(l), Vector(l, 0.1)};
      for (std::size_t d = 0; d < l; ++d) f.mu[d] = (pos[d] += rng.normal());
      lat.push_back(f);
    }
    const auto gs = build_gs_sequence(lat);
    const std::size_t c = 1 + rng.below(8);
    const auto fit = kmeans_fit(gs, c, rep);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
      if (fit.objective_trace[i] > fit.objective_trace[i - 1]) monotone = false;
    for (double eps : {0.0, 1.0}) {
      const auto t = estimate_transitions(fit.labels, c, eps);
      for (std::size_t i = 0; i < c; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += t.probabilities(i, j);
        worst_row = std::max(worst_row, std::abs(s - 1.0));
      }
    }
  }
  return {monotone && worst_row <= 1e-12,
          std::string("objective ") + (monotone ? "monotone" : "NOT monotone") +
              ", max row-sum error " + fmt("%.1e", worst_row)};
}

// ---- 6, 7, 8 -----------------------------------------------------------------

struct Run {
  fs::path dir;
  double seconds = 0.0;
};

const char* kPresets[] = {"uturn", "stop", "avoid"};

// gen + train + score of every preset and of the training sequence itself.
Run full_run(const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::remove_all(dir);
  fs::create_directories(dir);
  cmd_gen(preset("train", 1), dir / "train.lmjf", dir / "train_labels.csv");
  for (const char* p : kPresets)
    cmd_gen(preset(p, 2), dir / (std::string(p) + ".lmjf"), dir / (std::string(p) + "_labels.csv"));
  PipelineConfig cfg;
  cfg.dataset = dir / "train.lmjf";
  cfg.bundle = dir / "model";
  cmd_train(cfg);
  for (const char* p : kPresets) {
    cfg.report = dir / (std::string(p) + "_report.csv");
    cfg.plot = dir / (std::string(p) + ".svg");
    cmd_score(cfg, dir / (std::string(p) + ".lmjf"));
  }
  cfg.report = dir / "train_report.csv";
  cfg.plot = dir / "train.svg";
  cmd_score(cfg, dir / "train.lmjf");
  return {dir, seconds_since(t0)};
}

Outcome detection(const Run& run) {
  bool ok = run.seconds < 300.0;
  std::string detail;
  for (const char* p : kPresets) {
    const auto report = read_report(run.dir / (std::string(p) + "_report.csv"));
    const auto labels = read_labels(run.dir / (std::string(p) + "_labels.csv"));
    const auto m = evaluate_report(report, labels);
    const double need = std::string(p) == "uturn" ? 0.90 : 0.80;
    ok = ok && m.auc >= need && m.false_positive_rate <= 0.10;
    detail += std::string(p) + " auc " + fmt("%.3f", m.auc) + " fpr " + fmt("%.3f", m.false_positive_rate) + "; ";
  }
  return {ok, detail + "runtime " + fmt("%.0f", run.seconds) + " s"};
}

Outcome self_consistency(const Run& run) {
  const auto report = read_report(run.dir / "train_report.csv");
  std::size_t flagged = 0;
  for (bool f : report.final_flag) flagged += f ? 1 : 0;
  const double frac = static_cast<double>(flagged) / static_cast<double>(report.size());
  return {frac <= 0.01, std::to_string(flagged) + " of " + std::to_string(report.size()) +
                            " training frames flagged (" + fmt("%.2f", 100 * frac) + "%)"};
}

Outcome determinism(const Run& a, const Run& b) {
  std::size_t files = 0;
  std::string mismatch;
  for (const auto& e : fs::recursive_directory_iterator(a.dir)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a.dir);
    const fs::path other = b.dir / rel;
    ++files;
    if (!fs::exists(other) || read_text(e.path()) != read_text(other)) {
      mismatch = rel.string();
      break;
    }
  }
  std::size_t files_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b.dir)) files_b += e.is_regular_file() ? 1 : 0;
  if (mismatch.empty() && files_b != files) mismatch = "file count";
  return {mismatch.empty(), mismatch.empty() ? std::to_string(files) + " files byte-identical"
                                             : "differs: " + mismatch};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn, double limit) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = seconds_since(t0);
    if (limit > 0 && s >= limit) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f", limit) + " s budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
    std::fflush(stdout);
  };

  report(1, "kalman oracle", kalman_oracle, 1.0);
  report(2, "unscented exactness", unscented_exactness, 1.0);
  report(3, "gradient correctness", gradients, 10.0);
  report(4, "unit conformance", unit_conformance, 0.0);
  report(5, "transitions and k-means", transitions_and_kmeans, 0.0);

  const fs::path root = fs::temp_directory_path() / ("lmj_acceptance_" + std::to_string(::getpid()));
  Run a, b;
  bool runs_ok = true;
  try {
    a = full_run(root / "a");
    b = full_run(root / "b");
  } catch (const std::exception& e) {
    runs_ok = false;
    std::printf("pipeline run threw: %s\n", e.what());
  }
  if (runs_ok) {
    report(6, "synthetic detection", [&] { return detection(a); }, 0.0);
    report(7, "self-consistency", [&] { return self_consistency(a); }, 0.0);
    report(8, "determinism", [&] { return determinism(a, b); }, 0.0);
  } else {
    for (int id : {6, 7, 8}) std::printf("FAIL %d: pipeline run failed\n", id);
    failures += 3;
  }
  fs::remove_all(root);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
