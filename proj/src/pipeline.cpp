#include "lmj/pipeline.hpp"

#include <limits>
#include <set>
#include <string>

#include "lmj/error.hpp"
#include "lmj/plot.hpp"

namespace fs = std::filesystem;

namespace lmj {

namespace {

void emit(const Logger& log, const std::string& line) {
  if (log) log(line);
}

template <typename F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::kAdam;
  if (s == "sgd") return Optimizer::kSgd;
  throw InvalidInput("unknown optimizer '" + s + "' (expected adam or sgd)");
}

}  // namespace

void PipelineConfig::validate() const {
  if (latent_dim == 0 || clusters == 0 || particles == 0 || window == 0 || vae_epochs == 0 ||
      vae_batch == 0 || dyn_batch == 0 || dyn_hidden_factor == 0 || vae_hidden.empty())
    throw InvalidInput("config: all counts must be at least 1");
  for (std::size_t h : vae_hidden)
    if (h == 0) throw InvalidInput("config: hidden layer widths must be at least 1");
  if (!(smoothing >= 0.0)) throw InvalidInput("config: smoothing must be >= 0");
  if (!(tau_factor > 0.0)) throw InvalidInput("config: tau_factor must be > 0");
  if (!(vae_lr > 0.0) || !(dyn_lr > 0.0)) throw InvalidInput("config: learning rates must be > 0");
}

VaeTrainConfig PipelineConfig::vae_config() const {
  VaeTrainConfig c;
  c.latent_dim = latent_dim;
  c.hidden = vae_hidden;
  c.activation = activation;
  c.epochs = vae_epochs;
  c.batch_size = vae_batch;
  c.learning_rate = vae_lr;
  c.optimizer = vae_optimizer;
  c.seed = seed;
  return c;
}

DynamicsTrainConfig PipelineConfig::dynamics_config() const {
  DynamicsTrainConfig c;
  c.hidden_factor = dyn_hidden_factor;
  c.activation = activation;
  c.epochs = dyn_epochs;
  c.batch_size = dyn_batch;
  c.learning_rate = dyn_lr;
  c.seed = seed + 1;
  c.min_pairs_factor = dyn_min_pairs_factor;
  return c;
}

std::vector<std::string> config_keys() {
  return {"dataset",     "bundle",     "report",     "plot",         "latent_dim",
          "clusters",    "ukf_alpha",  "ukf_beta",   "ukf_kappa",    "particles",
          "window",      "smoothing",  "tau_factor", "seed",         "vae_hidden",
          "activation",  "vae_epochs", "vae_batch",  "vae_lr",       "vae_optimizer",
          "dyn_hidden_factor", "dyn_epochs", "dyn_batch", "dyn_lr", "dyn_min_pairs_factor"};
}

PipelineConfig config_from_kv(const KeyValueFile& kv) {
  const auto keys = config_keys();
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : kv.entries())
    if (!known.count(k)) throw InvalidInput("config: unknown key '" + k + "'");

  PipelineConfig c;
  auto str = [&](const char* k, auto& out) {
    if (kv.has(k)) out = kv.get(k);
  };
  auto count = [&](const char* k, std::size_t& out) {
    if (kv.has(k)) out = parse_count(kv.get(k));
  };
  auto real = [&](const char* k, double& out) {
    if (kv.has(k)) out = parse_double(kv.get(k));
  };
  str("dataset", c.dataset);
  str("bundle", c.bundle);
  str("report", c.report);
  str("plot", c.plot);
  count("latent_dim", c.latent_dim);
  count("clusters", c.clusters);
  real("ukf_alpha", c.ukf.alpha);
  real("ukf_beta", c.ukf.beta);
  real("ukf_kappa", c.ukf.kappa);
  count("particles", c.particles);
  count("window", c.window);
  real("smoothing", c.smoothing);
  real("tau_factor", c.tau_factor);
  if (kv.has("seed")) c.seed = parse_count(kv.get("seed"));
  if (kv.has("vae_hidden")) c.vae_hidden = split_counts(kv.get("vae_hidden"));
  if (kv.has("activation")) c.activation = parse_activation(kv.get("activation"));
  count("vae_epochs", c.vae_epochs);
  count("vae_batch", c.vae_batch);
  real("vae_lr", c.vae_lr);
  if (kv.has("vae_optimizer")) c.vae_optimizer = parse_optimizer(kv.get("vae_optimizer"));
  count("dyn_hidden_factor", c.dyn_hidden_factor);
  count("dyn_epochs", c.dyn_epochs);
  count("dyn_batch", c.dyn_batch);
  real("dyn_lr", c.dyn_lr);
  count("dyn_min_pairs_factor", c.dyn_min_pairs_factor);
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) { return config_from_kv(KeyValueFile::load(path)); }

KeyValueFile config_to_kv(const PipelineConfig& c) {
  KeyValueFile kv;
  kv.set("dataset", c.dataset.string());
  kv.set("bundle", c.bundle.string());
  kv.set("report", c.report.string());
  kv.set("plot", c.plot.string());
  kv.set("latent_dim", std::to_string(c.latent_dim));
  kv.set("clusters", std::to_string(c.clusters));
  kv.set("ukf_alpha", format_double(c.ukf.alpha));
  kv.set("ukf_beta", format_double(c.ukf.beta));
  kv.set("ukf_kappa", format_double(c.ukf.kappa));
  kv.set("particles", std::to_string(c.particles));
  kv.set("window", std::to_string(c.window));
  kv.set("smoothing", format_double(c.smoothing));
  kv.set("tau_factor", format_double(c.tau_factor));
  kv.set("seed", std::to_string(c.seed));
  kv.set("vae_hidden", join_counts(c.vae_hidden));
  kv.set("activation", std::string(activation_name(c.activation)));
  kv.set("vae_epochs", std::to_string(c.vae_epochs));
  kv.set("vae_batch", std::to_string(c.vae_batch));
  kv.set("vae_lr", format_double(c.vae_lr));
  kv.set("vae_optimizer", c.vae_optimizer == Optimizer::kAdam ? "adam" : "sgd");
  kv.set("dyn_hidden_factor", std::to_string(c.dyn_hidden_factor));
  kv.set("dyn_epochs", std::to_string(c.dyn_epochs));
  kv.set("dyn_batch", std::to_string(c.dyn_batch));
  kv.set("dyn_lr", format_double(c.dyn_lr));
  kv.set("dyn_min_pairs_factor", std::to_string(c.dyn_min_pairs_factor));
  return kv;
}

std::vector<LatentFrame> encode_all(const VaeParams& vae, const std::vector<Frame>& frames) {
  std::vector<LatentFrame> out;
  out.reserve(frames.size());
  for (const Frame& f : frames) out.push_back(encode(vae, f));
  return out;
}

TrainOutcome train_pipeline(const std::vector<Frame>& frames, const PipelineConfig& cfg,
                            const Logger& log) {
  cfg.validate();
  if (frames.size() < 2) throw StageError("train", "need at least 2 training frames");
  TrainOutcome out;
  ModelBundle& b = out.bundle;
  b.frame_width = frames.front().width;
  b.frame_height = frames.front().height;
  b.vae_seed = cfg.seed;

  run_stage("vae", [&] {
    const VaeTrainResult r = train_vae(frames, cfg.vae_config());
    b.vae = r.params;
    emit(log, "vae: " + std::to_string(r.step_losses.size()) + " steps, loss " +
                  format_double(r.step_losses.front()) + " -> " +
                  format_double(r.step_losses.back()));
  });

  out.latents = run_stage("encode", [&] { return encode_all(b.vae, frames); });
  const auto gs = run_stage("generalized_states", [&] { return build_gs_sequence(out.latents); });

  const KMeansFit fit = run_stage("kmeans", [&] { return kmeans_fit(gs, cfg.clusters, cfg.seed); });
  b.filter.clusters = fit.model;
  emit(log, "kmeans: " + std::to_string(fit.iterations) + " iterations, members " +
                join_counts(fit.model.member_counts));

  b.filter.transitions = run_stage(
      "transitions", [&] { return estimate_transitions(fit.labels, cfg.clusters, cfg.smoothing); });

  const DynamicsTrainConfig dcfg = cfg.dynamics_config();
  for (std::size_t s = 0; s < cfg.clusters; ++s) {
    run_stage("dynamics cluster " + std::to_string(s), [&] {
      const auto pairs = build_training_pairs(out.latents, gs, fit.labels, s, cfg.ukf);
      DynamicsNet d = train_dynamics(pairs, s, cfg.latent_dim,
                                     fit.model.raw_velocity_covariance(s), dcfg);
      emit(log, "dynamics: cluster " + std::to_string(s) + ", " + std::to_string(pairs.size()) +
                    " pairs" +
                    (d.fallback ? ", constant-velocity fallback"
                                : ", rmse " + format_double(dynamics_rmse(d, pairs))));
      b.filter.dynamics.push_back(std::move(d));
    });
  }

  run_stage("calibration", [&] {
    // First pass with uniform resampling fixes the temperature; the second
    // pass, run exactly as scoring will run, fixes the threshold.
    AmjpfConfig fc;
    fc.particles = cfg.particles;
    fc.ukf = cfg.ukf;
    fc.window = cfg.window;
    fc.seed = cfg.seed;
    fc.tau = std::numeric_limits<double>::max();
    const AnomalyReport first = score_sequence(b.filter, out.latents, fc, 0.0);
    const double provisional = calibrate_threshold(first.y);
    fc.tau = cfg.tau_factor * provisional;
    if (!(fc.tau > 0.0)) fc.tau = std::numeric_limits<double>::min();
    AnomalyReport second = score_sequence(b.filter, out.latents, fc, 0.0);
    const double threshold = calibrate_threshold(second.y);
    for (std::size_t i = 0; i < second.size(); ++i) second.raw_flag[i] = second.y[i] > threshold;
    second.threshold = threshold;
    second.final_flag = window_filter(second.raw_flag, fc.window);
    b.calibration = {threshold, fc};
    out.training_report = std::move(second);
    emit(log, "calibration: threshold " + format_double(threshold) + ", tau " +
                  format_double(fc.tau));
  });
  return out;
}

AnomalyReport score_frames(const ModelBundle& bundle, const std::vector<Frame>& frames) {
  for (const Frame& f : frames)
    if (f.width != bundle.frame_width || f.height != bundle.frame_height)
      throw InvalidInput("frame size " + std::to_string(f.width) + "x" + std::to_string(f.height) +
                         " does not match the model (" + std::to_string(bundle.frame_width) +
                         "x" + std::to_string(bundle.frame_height) + ")");
  const auto latents = encode_all(bundle.vae, frames);
  return score_sequence(bundle.filter, latents, bundle.calibration.filter,
                        bundle.calibration.threshold);
}

DetectionMetrics evaluate_report(const AnomalyReport& report, const std::vector<bool>& labels) {
  std::vector<bool> truth;
  truth.reserve(report.size());
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (report.frame[i] >= labels.size())
      throw InvalidInput("report frame " + std::to_string(report.frame[i]) +
                         " has no label (labels cover " + std::to_string(labels.size()) +
                         " frames)");
    truth.push_back(labels[report.frame[i]]);
  }
  if (report.size() + 1 != labels.size())
    throw InvalidInput("report has " + std::to_string(report.size()) + " rows for " +
                       std::to_string(labels.size()) + " labelled frames");
  return detection_metrics(report.final_flag, report.y, truth);
}

std::size_t cmd_gen(const ScenarioSpec& spec, const fs::path& frames_out,
                    const fs::path& labels_out, const Logger& log) {
  const Scenario sc = run_stage("gen", [&] { return generate(spec); });
  run_stage("write", [&] {
    write_frames(frames_out, sc.frames);
    if (!labels_out.empty()) write_labels(labels_out, sc.abnormal);
  });
  emit(log, "frames: " + std::to_string(sc.frames.size()));
  return sc.frames.size();
}

void cmd_train(const PipelineConfig& cfg, const Logger& log) {
  const auto frames = run_stage("load dataset", [&] { return read_frames(cfg.dataset); });
  emit(log, "dataset: " + std::to_string(frames.size()) + " frames from " + cfg.dataset.string());
  const TrainOutcome out = train_pipeline(frames, cfg, log);
  run_stage("save bundle", [&] {
    fs::remove_all(cfg.bundle);
    save_bundle(cfg.bundle, out.bundle);
  });
  std::size_t flagged = 0;
  for (bool f : out.training_report.final_flag) flagged += f ? 1 : 0;
  emit(log, "training self-check: " + std::to_string(flagged) + " of " +
                std::to_string(out.training_report.size()) + " frames flagged");
  emit(log, "bundle: " + cfg.bundle.string());
}

AnomalyReport cmd_score(const PipelineConfig& cfg, const fs::path& dataset, const Logger& log) {
  const ModelBundle bundle = run_stage("load bundle", [&] { return load_bundle(cfg.bundle); });
  const auto frames = run_stage("load dataset", [&] { return read_frames(dataset); });
  AnomalyReport report = run_stage("score", [&] { return score_frames(bundle, frames); });
  run_stage("write report", [&] {
    write_report(cfg.report, report);
    if (!cfg.plot.empty())
      write_text(cfg.plot, anomaly_plot_svg(report, "Anomaly signal: " + dataset.filename().string()));
  });
  std::size_t flagged = 0;
  for (bool f : report.final_flag) flagged += f ? 1 : 0;
  emit(log, "scored " + std::to_string(report.size()) + " frames, " + std::to_string(flagged) +
                " flagged, threshold " + format_double(report.threshold));
  return report;
}

DetectionMetrics cmd_eval(const fs::path& report_path, const fs::path& labels_path,
                          const Logger& log) {
  const AnomalyReport report = run_stage("load report", [&] { return read_report(report_path); });
  const auto labels = run_stage("load labels", [&] { return read_labels(labels_path); });
  const DetectionMetrics m = run_stage("eval", [&] { return evaluate_report(report, labels); });
  emit(log, "precision " + format_double(m.precision));
  emit(log, "recall " + format_double(m.recall));
  emit(log, "false_positive_rate " + format_double(m.false_positive_rate));
  emit(log, "auc " + format_double(m.auc));
  return m;
}

}  // namespace lmj
