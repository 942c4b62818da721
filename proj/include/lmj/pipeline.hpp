#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmj/amjpf.hpp"
#include "lmj/bundle.hpp"
#include "lmj/dynamics_model.hpp"
#include "lmj/io.hpp"
#include "lmj/metrics.hpp"
#include "lmj/synthetic_world.hpp"
#include "lmj/vae.hpp"

namespace lmj {

/// All pipeline settings. Every key has a default; a config file overrides
/// any subset using the names listed in `config_keys()`.
struct PipelineConfig {
  std::filesystem::path dataset = "train.lmjf";
  std::filesystem::path bundle = "model";
  std::filesystem::path report = "report.csv";
  std::filesystem::path plot = "report.svg";

  std::size_t latent_dim = 8;
  std::size_t clusters = 6;
  UkfParams ukf;
  std::size_t particles = 100;
  std::size_t window = 3;
  double smoothing = 1.0;
  double tau_factor = 1.0;  // resampling temperature relative to the provisional threshold
  std::uint64_t seed = 42;

  std::vector<std::size_t> vae_hidden{128};
  Activation activation = Activation::kTanh;
  std::size_t vae_epochs = 600;
  std::size_t vae_batch = 32;
  double vae_lr = 1e-3;
  Optimizer vae_optimizer = Optimizer::kSgd;

  std::size_t dyn_hidden_factor = 4;
  std::size_t dyn_epochs = 150;
  std::size_t dyn_batch = 32;
  double dyn_lr = 3e-3;
  std::size_t dyn_min_pairs_factor = 10;

  void validate() const;
  VaeTrainConfig vae_config() const;
  DynamicsTrainConfig dynamics_config() const;
};

std::vector<std::string> config_keys();
/// Unknown keys are rejected so typos do not silently fall back to defaults.
PipelineConfig config_from_kv(const KeyValueFile& kv);
PipelineConfig load_config(const std::filesystem::path& path);
KeyValueFile config_to_kv(const PipelineConfig& cfg);

/// Failure tagged with the pipeline stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using Logger = std::function<void(const std::string&)>;

struct TrainOutcome {
  ModelBundle bundle;
  std::vector<LatentFrame> latents;
  AnomalyReport training_report;
};

/// VAE -> encode -> generalized states -> k-means -> T -> per-cluster
/// dynamics -> calibration on the training sequence.
TrainOutcome train_pipeline(const std::vector<Frame>& frames, const PipelineConfig& cfg,
                            const Logger& log = {});

std::vector<LatentFrame> encode_all(const VaeParams& vae, const std::vector<Frame>& frames);

/// Encodes and scores frames with a loaded bundle.
AnomalyReport score_frames(const ModelBundle& bundle, const std::vector<Frame>& frames);

/// Aligns report rows with per-frame labels through the report's frame column.
DetectionMetrics evaluate_report(const AnomalyReport& report, const std::vector<bool>& labels);

// Command entry points used by the CLI. They print to `log` and throw
// StageError on failure.
std::size_t cmd_gen(const ScenarioSpec& spec, const std::filesystem::path& frames_out,
                    const std::filesystem::path& labels_out, const Logger& log = {});
void cmd_train(const PipelineConfig& cfg, const Logger& log = {});
AnomalyReport cmd_score(const PipelineConfig& cfg, const std::filesystem::path& dataset,
                        const Logger& log = {});
DetectionMetrics cmd_eval(const std::filesystem::path& report,
                          const std::filesystem::path& labels, const Logger& log = {});

}  // namespace lmj
