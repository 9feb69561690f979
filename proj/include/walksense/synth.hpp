#pragma once
// Deterministic synthetic-walk generator: per-channel sensor streams at the
// native sampling rates, EDA built by the forward tonic-plus-Bateman model
// with pulses fired where the planted rule holds, optional Type-1/Type-2
// corruption, and per-window ground truth.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "walksense/isovist.hpp"
#include "walksense/types.hpp"

namespace walksense {

struct SpecInvalid : Error {
  using Error::Error;
};

// Plateau of height delta over [start_s, end_s), with linear shoulders of
// ramp_s seconds inside each end; ramp_s = 0 gives a hard step.
struct StepEvent {
  double start_s = 0.0;  // relative to walk start
  double end_s = 0.0;
  double delta = 0.0;
  double ramp_s = 0.0;
};

struct ChannelProgram {
  double baseline = 0.0;
  double trend_per_s = 0.0;
  double noise_sd = 0.0;
  std::vector<StepEvent> steps;

  double value_at(double t_rel) const;            // noiseless
  double mean_over(double a_rel, double b_rel) const;
};

// Arousal predicate over the environment: A wherever sound exceeds the one
// bound or illuminance falls below the other; NaN disables a side.
struct PlantedRule {
  double sound_above = std::numeric_limits<double>::quiet_NaN();
  double illuminance_below = std::numeric_limits<double>::quiet_NaN();

  bool active() const;
  bool holds(double sound, double illuminance) const;
};

enum class Corruption { none, type1, type2 };

struct WalkSpec {
  std::string participant_id = "p01";
  double start_time = 1744450200.0;  // epoch seconds
  double duration_s = 1740.0;        // 29 minutes
  double start_lat = 52.5200;
  double start_lon = 13.4050;
  double speed_mps = 1.2;
  std::vector<Point> waypoints_m;  // local meters; empty = straight east

  ChannelProgram sound{55.0, 0.0, 1.5, {}};        // dB
  ChannelProgram dust{0.03, 0.0, 0.005, {}};       // mg/m3
  ChannelProgram temp{15.0, 0.0, 0.2, {}};         // C
  ChannelProgram humidity{55.0, 0.0, 1.0, {}};     // %
  ChannelProgram illuminance{800.0, 0.0, 30.0, {}};  // lux

  PlantedRule rule;
  double window_seconds = 5.0;
  int pulses_per_window = 1;        // target count in each rule-active window
  double pulse_min_gap_s = 4.0;     // keeps responses separable
  double pulse_edge_margin_s = 1.0; // keeps onsets away from window edges
  double pulse_amp_lo = 0.05;       // uS, trough-to-peak
  double pulse_amp_hi = 0.5;

  double eda_baseline_us = 2.0;
  double eda_drift_per_s = 1e-4;
  double eda_wobble_us = 0.02;      // slow sinusoidal tonic variation
  double eda_wobble_period_s = 600.0;
  double eda_noise_sd = 2e-4;
  double tau1 = 2.0;
  double tau2 = 0.75;

  Corruption corruption = Corruption::none;
  std::uint64_t seed = 1;
};

struct WindowTruth {
  long index = 0;
  double start = 0.0;
  double end = 0.0;
  long nscr = 0;
  bool rule_active = false;
  BinaryLabel binary = BinaryLabel::N;
  MulticlassLabel multiclass = MulticlassLabel::N;
};

struct GeneratedWalk {
  std::string participant_id;
  std::vector<SignalStream> streams;   // one per channel, enum order
  std::vector<WindowTruth> windows;    // full windows only
  std::vector<double> pulse_onsets;    // grid-aligned absolute times
};

GeneratedWalk generate_walk(const WalkSpec& spec);

// dir/<participant>_<channel>.csv per stream plus dir/<participant>_truth.csv
// and dir/<participant>_pulses.csv (onset times, for re-binning at other
// window widths).
void write_walk(const GeneratedWalk& walk, const std::string& dir);
std::string stream_path(const std::string& dir, const std::string& participant,
                        Channel channel);
std::string truth_path(const std::string& dir, const std::string& participant);
std::string pulses_path(const std::string& dir, const std::string& participant);
std::vector<WindowTruth> read_truth(const std::string& path);
std::vector<double> read_pulses(const std::string& path);

}  // namespace walksense
