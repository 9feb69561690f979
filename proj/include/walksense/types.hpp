#pragma once
// Shared data model: sensor streams, time windows, event/response rows and
// the compiled dataset that every analysis stage consumes.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace walksense {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Error conditions shared by several stages.
struct EmptyStream : Error {
  using Error::Error;
};
struct TooShort : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};
struct EmptyResult : Error {
  using Error::Error;
};

enum class Channel {
  gps_lat,
  gps_lon,
  sound_db,
  dust_mg_m3,
  temp_c,
  humidity_pct,
  illuminance_lux,
  eda_us,
};

constexpr int kNumChannels = 8;

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

// Nominal acquisition rate per channel. GPS, temperature, humidity and
// illuminance log at 1 Hz, sound and dust at 0.4 Hz, EDA at 4 Hz.
double channel_nominal_hz(Channel c);

struct Sample {
  double t = 0.0;  // seconds since epoch
  double value = 0.0;
};

struct SignalStream {
  std::string participant_id;
  Channel channel = Channel::eda_us;
  std::vector<Sample> samples;  // strictly increasing timestamps
  double nominal_hz = 0.0;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  double start() const { return samples.front().t; }
  double end() const { return samples.back().t; }
  double duration() const { return empty() ? 0.0 : end() - start(); }
};

struct TimeWindow {
  int index = 0;
  double start = 0.0;
  double end = 0.0;
  double width_t = 0.0;  // nominal width; the trailing window may be shorter
  bool partial = false;
};

struct IsovistDescriptor {
  double area = 0.0;         // m^2
  double perimeter = 0.0;    // m
  double compactness = 0.0;  // 4*pi*A/P^2, 1 for a circle
  double occlusivity = 0.0;  // m of occluding boundary
};

// Model-input feature order is fixed; files, reports and trained models all
// rely on it.
constexpr int kNumFeatures = 9;
extern const std::array<const char*, kNumFeatures> kFeatureNames;

int feature_index(const std::string& name);

struct EventVector {
  TimeWindow window;
  double sound_db = 0.0;
  double dust_mg_m3 = 0.0;
  double temp_c = 0.0;
  double humidity_pct = 0.0;
  double illuminance_lux = 0.0;
  IsovistDescriptor isovist;
  double gps_lat = 0.0;  // window-start fix
  double gps_lon = 0.0;

  std::array<double, kNumFeatures> features() const {
    return {sound_db,       dust_mg_m3,           temp_c,
            humidity_pct,   illuminance_lux,      isovist.area,
            isovist.perimeter, isovist.compactness, isovist.occlusivity};
  }
};

enum class BinaryLabel { N, A };
enum class MulticlassLabel { N, LA, HA };

const char* label_name(BinaryLabel l);
const char* label_name(MulticlassLabel l);
BinaryLabel binary_from_name(const std::string& s);
MulticlassLabel multiclass_from_name(const std::string& s);

struct ResponseLabel {
  TimeWindow window;
  int nscr = 0;
  BinaryLabel binary = BinaryLabel::N;
  MulticlassLabel multiclass = MulticlassLabel::N;
};

struct ParticipantDataset {
  std::string participant_id;
  std::vector<std::pair<EventVector, ResponseLabel>> rows;  // ordered by window index

  int m() const { return static_cast<int>(rows.size()); }
};

// One stacked row. Windows are participant-relative, so only the index
// survives compilation; all fields below round-trip exactly through the
// compiled file.
struct CompiledRow {
  std::string participant_id;
  int window_index = 0;
  std::array<double, kNumFeatures> features{};
  int nscr = 0;
  BinaryLabel binary = BinaryLabel::N;
  MulticlassLabel multiclass = MulticlassLabel::N;
  double gps_lat = 0.0;
  double gps_lon = 0.0;

  bool operator==(const CompiledRow& o) const;
};

struct CompiledDataset {
  int participants = 0;
  std::vector<CompiledRow> rows;

  bool empty() const { return rows.empty(); }
  std::size_t size() const { return rows.size(); }
};

}  // namespace walksense
