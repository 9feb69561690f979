#include "walksense/types.hpp"

namespace walksense {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "sound_db",        "dust_mg_m3",      "temp_c",
    "humidity_pct",    "illuminance_lux", "iso_area",
    "iso_perimeter",   "iso_compactness", "iso_occlusivity",
};

namespace {

const char* kChannelNames[kNumChannels] = {
    "gps_lat",      "gps_lon",         "sound_db", "dust_mg_m3",
    "temp_c",       "humidity_pct",    "illuminance_lux", "eda_us",
};

const double kChannelHz[kNumChannels] = {1.0, 1.0, 0.4, 0.4, 1.0, 1.0, 1.0, 4.0};

}  // namespace

const char* channel_name(Channel c) { return kChannelNames[static_cast<int>(c)]; }

Channel channel_from_name(const std::string& name) {
  for (int i = 0; i < kNumChannels; ++i)
    if (name == kChannelNames[i]) return static_cast<Channel>(i);
  throw Error("unknown channel name: " + name);
}

double channel_nominal_hz(Channel c) { return kChannelHz[static_cast<int>(c)]; }

int feature_index(const std::string& name) {
  for (int i = 0; i < kNumFeatures; ++i)
    if (name == kFeatureNames[i]) return i;
  throw Error("unknown feature name: " + name);
}

const char* label_name(BinaryLabel l) { return l == BinaryLabel::N ? "N" : "A"; }

const char* label_name(MulticlassLabel l) {
  switch (l) {
    case MulticlassLabel::N: return "N";
    case MulticlassLabel::LA: return "LA";
    default: return "HA";
  }
}

BinaryLabel binary_from_name(const std::string& s) {
  if (s == "N") return BinaryLabel::N;
  if (s == "A") return BinaryLabel::A;
  throw Error("unknown binary label: " + s);
}

MulticlassLabel multiclass_from_name(const std::string& s) {
  if (s == "N") return MulticlassLabel::N;
  if (s == "LA") return MulticlassLabel::LA;
  if (s == "HA") return MulticlassLabel::HA;
  throw Error("unknown multiclass label: " + s);
}

bool CompiledRow::operator==(const CompiledRow& o) const {
  return participant_id == o.participant_id && window_index == o.window_index &&
         features == o.features && nscr == o.nscr && binary == o.binary &&
         multiclass == o.multiclass && gps_lat == o.gps_lat && gps_lon == o.gps_lon;
}

}  // namespace walksense
