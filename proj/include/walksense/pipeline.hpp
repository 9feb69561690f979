#pragma once
// End-to-end orchestration: per-participant ingest through fusion, the
// analysis stages over the compiled dataset, per-stage artifact files, a
// structured run report, and the synthetic dataset builder.

#include <string>
#include <vector>

#include "walksense/config.hpp"
#include "walksense/synth.hpp"

namespace walksense {

struct StageFailure : Error {
  using Error::Error;
};

struct StageInfo {
  std::string name;
  double seconds = 0.0;
  std::string note;  // one-line outcome summary
};

struct RunReport {
  std::vector<StageInfo> stages;
  std::vector<std::string> discarded;  // participant: verdict and evidence
  long rows_dropped = 0;               // alignment drops across participants
  long windows_compiled = 0;
  bool ok = true;

  std::string text() const;
};

// Known stage names, in execution order:
//   ingest qc smooth arousal isovist fuse train fuzzy featsel som geomap
// Data stages always execute in memory; artifact files are written for the
// requested stages only, plus out_dir/report.txt on every run. Analysis
// stages run only when requested. Failures surface as StageFailure naming
// the stage.
RunReport run_pipeline(const RunConfig& config,
                       const std::vector<std::string>& stages);

// Expands to every stage (the `all` subcommand).
std::vector<std::string> all_stages();

// Deterministic per-participant walk programs for the synthetic dataset:
// seeded loud and dark segments aligned to window boundaries so the planted
// rule is unambiguous at the configured quantification rate.
WalkSpec synth_walk_spec(const RunConfig& config, int index);

struct SynthResult {
  RunConfig manifest;       // ready-to-run config pointing at the files
  std::string config_path;  // out_dir/synth_config.json
  std::vector<std::string> participant_ids;
};

// Writes streams, ground truth and pulse files under out_dir/data/<id>/,
// plus the manifest config.
SynthResult generate_dataset(const RunConfig& config);

}  // namespace walksense
