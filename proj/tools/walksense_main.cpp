// Command line entry point: one subcommand per pipeline stage, plus the
// synthetic dataset generator. Stages communicate via files under --out, so
// partial reruns are safe.
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "walksense/config.hpp"
#include "walksense/pipeline.hpp"

namespace {

void apply_seed(walksense::RunConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.reptree.seed = seed;
  c.mlp.seed = seed;
  c.svm.seed = seed;
  c.furia.seed = seed;
  c.som.seed = seed;
  c.featsel.seed = seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"walksense: walking-arousal sensor pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double window_seconds = 0.0;
  app.add_option("--config", config_path, "JSON run config path");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "run seed (overrides config)");
  app.add_option("--window-seconds", window_seconds,
                 "quantification window width in seconds (overrides config)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "read, upsample and align the sensor streams"},
      {"qc", "classify EDA signal quality and list discards"},
      {"smooth", "wavelet-smooth the EDA streams"},
      {"arousal", "decompose EDA and detect skin-conductance responses"},
      {"isovist", "compute per-window visibility descriptors"},
      {"fuse", "quantify windows and compile the stacked dataset"},
      {"train", "cross-validate the configured predictors"},
      {"fuzzy", "induce and fuzzify the rule set"},
      {"featsel", "backward feature elimination hierarchy"},
      {"som", "train the self-organizing map and export its matrices"},
      {"geomap", "bin responses onto the map grid and export GeoJSON"},
      {"synth", "generate a synthetic walk dataset"},
      {"all", "run every stage in order"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);

  try {
    walksense::RunConfig config;
    if (!config_path.empty()) config = walksense::load_config(config_path);
    if (app.count("--seed") > 0) apply_seed(config, seed);
    if (app.count("--window-seconds") > 0) {
      config.window_seconds = window_seconds;
      config.synth.window_seconds = window_seconds;
    }
    if (app.count("--out") > 0) config.out_dir = out_dir;

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "synth") {
      const walksense::SynthResult r = walksense::generate_dataset(config);
      std::cout << "generated " << r.participant_ids.size()
                << " participants under " << config.out_dir << "/data\n"
                << "manifest: " << r.config_path << '\n';
      return 0;
    }
    const std::vector<std::string> stages =
        name == "all" ? walksense::all_stages()
                      : std::vector<std::string>{name};
    const walksense::RunReport report = walksense::run_pipeline(config, stages);
    std::cout << report.text();
    return report.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
