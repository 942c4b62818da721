// Command-line front end: gen, train, score, eval, config.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lmj/error.hpp"
#include "lmj/io.hpp"
#include "lmj/kernels.hpp"
#include "lmj/pipeline.hpp"

namespace {

lmj::ScenarioSpec parse_segments(const std::string& text, std::uint64_t seed) {
  lmj::ScenarioSpec spec;
  spec.seed = seed;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw lmj::InvalidInput("segment '" + item + "' must look like kind:length");
    spec.segments.push_back(
        {lmj::parse_trajectory(item.substr(0, colon)), lmj::parse_count(item.substr(colon + 1))});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent Markov-jump anomaly detection on frame sequences"};
  app.require_subcommand(1);
  const lmj::Logger log = [](const std::string& line) { std::cout << line << '\n'; };

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic labelled frame sequence");
  std::string preset_name = "train";
  std::string segments;
  std::string gen_out = "frames.lmjf";
  std::string gen_labels;
  std::uint64_t gen_seed = 1;
  std::optional<double> noise;
  std::optional<double> radius;
  gen->add_option("--preset", preset_name, "train, stop, avoid or uturn")->capture_default_str();
  gen->add_option("--segments", segments, "Custom layout, e.g. loop_cw:100,stop:20 (overrides --preset)");
  gen->add_option("--seed", gen_seed, "Noise seed")->capture_default_str();
  gen->add_option("--noise", noise, "Pixel noise standard deviation");
  gen->add_option("--radius", radius, "Dot radius in pixels");
  gen->add_option("--out", gen_out, "Frame dataset output")->capture_default_str();
  gen->add_option("--labels", gen_labels, "Ground-truth CSV output");

  // train / score share the config file
  std::string config_path;
  std::string dataset_override;
  std::string bundle_override;
  auto* train = app.add_subcommand("train", "Train the model bundle from a frame dataset");
  train->add_option("--config", config_path, "Configuration file (key = value)");
  train->add_option("--dataset", dataset_override, "Training dataset (overrides config)");
  train->add_option("--bundle", bundle_override, "Bundle directory (overrides config)");

  auto* score = app.add_subcommand("score", "Score a frame dataset with a trained bundle");
  std::string report_override;
  std::string plot_override;
  score->add_option("--config", config_path, "Configuration file (key = value)");
  score->add_option("--dataset", dataset_override, "Dataset to score")->required();
  score->add_option("--bundle", bundle_override, "Bundle directory (overrides config)");
  score->add_option("--report", report_override, "Report CSV (overrides config)");
  score->add_option("--plot", plot_override, "SVG plot (overrides config)");

  auto* eval = app.add_subcommand("eval", "Compare a report with ground-truth labels");
  std::string eval_report;
  std::string eval_labels;
  eval->add_option("--report", eval_report, "Report CSV")->required();
  eval->add_option("--labels", eval_labels, "Ground-truth CSV")->required();

  auto* config = app.add_subcommand("config", "Print the default configuration");

  CLI11_PARSE(app, argc, argv);

  auto load = [&]() {
    lmj::PipelineConfig cfg = config_path.empty() ? lmj::PipelineConfig{} : lmj::load_config(config_path);
    if (!dataset_override.empty()) cfg.dataset = dataset_override;
    if (!bundle_override.empty()) cfg.bundle = bundle_override;
    if (!report_override.empty()) cfg.report = report_override;
    if (!plot_override.empty()) cfg.plot = plot_override;
    return cfg;
  };

  try {
    if (*gen) {
      lmj::ScenarioSpec spec =
          segments.empty() ? lmj::preset(preset_name, gen_seed) : parse_segments(segments, gen_seed);
      if (noise) spec.noise_sigma = *noise;
      if (radius) spec.dot_radius = *radius;
      lmj::cmd_gen(spec, gen_out, gen_labels, log);
    } else if (*train) {
      log("kernels: " + std::string(lmj::kernels::isa_name(lmj::kernels::active().isa)));
      lmj::cmd_train(load(), log);
    } else if (*score) {
      lmj::cmd_score(load(), dataset_override, log);
    } else if (*eval) {
      lmj::cmd_eval(eval_report, eval_labels, log);
    } else if (*config) {
      std::cout << lmj::config_to_kv(lmj::PipelineConfig{}).to_string();
    }
  } catch (const lmj::StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
