#pragma once
// Run configuration: participant manifest, per-stage parameters with the
// shipped defaults, JSON load/save, and validation.

#include <cstdint>
#include <string>
#include <vector>

#include "walksense/arousal.hpp"
#include "walksense/eda_prep.hpp"
#include "walksense/featsel.hpp"
#include "walksense/fuzzy.hpp"
#include "walksense/predictors.hpp"
#include "walksense/som.hpp"
#include "walksense/synth.hpp"

namespace walksense {

struct ConfigInvalid : Error {
  using Error::Error;
};

struct ParticipantEntry {
  std::string id;
  std::string dir;  // streams at <dir>/<id>_<channel>.csv
};

struct IsovistConfig {
  double fov_deg = 180.0;
  double radius_m = 100.0;
  double angular_step_deg = 1.0;
  std::string obstacles_path;  // empty = open field
};

struct GeomapConfig {
  double grid_meters = 10.0;
  bool divide_by_total = false;
};

struct SynthConfig {
  int participants = 3;
  double duration_s = 1740.0;
  double window_seconds = 5.0;
  double sound_above = 66.0;        // planted rule bounds, NaN disables
  double illuminance_below = 580.0;
  int corrupt_type1 = 0;  // trailing participants corrupted per mode
  int corrupt_type2 = 0;
  double pulse_amp_lo = 0.05;
  double pulse_amp_hi = 0.5;
  double noise_scale = 1.0;  // multiplies every channel's noise level
};

struct RunConfig {
  std::vector<ParticipantEntry> participants;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  double window_seconds = 5.0;
  HaBoundary ha_boundary = HaBoundary::ge6;
  double snap_tolerance_s = 0.5;
  double walk_start = 0.0;  // 0 = derive the span from the aligned data
  double walk_end = 0.0;

  double theta = 0.001;
  ThresholdMode threshold_mode = ThresholdMode::clamp;
  QcThresholds qc;
  CdaParams cda;
  ScrParams scr;
  IsovistConfig isovist;
  GeomapConfig geomap;

  Target target = Target::binary;
  int folds = 10;
  std::vector<PredictorKind> train_kinds = {PredictorKind::reptree};
  RepTreeParams reptree;
  MlpParams mlp;
  SvmParams svm;
  FuriaParams furia;
  SomParams som;
  FeatselOptions featsel;
  std::vector<PredictorKind> featsel_kinds = {PredictorKind::reptree};

  SynthConfig synth;
};

// Parse errors and unknown keys surface as ConfigInvalid with the key path.
RunConfig load_config(const std::string& path);
std::string config_json(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

// Checks the manifest: participants present, every stream file readable,
// obstacle file present when named, numeric ranges sane.
void validate_config(const RunConfig& config);

// Subset of checks for generator-only runs (no manifest needed).
void validate_synth(const RunConfig& config);

}  // namespace walksense
