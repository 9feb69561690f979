#include "walksense/fusion.hpp"

#include <cmath>
#include <map>

namespace walksense {

std::vector<TimeWindow> mark_windows(double walk_start, double walk_end, double t) {
  if (!(walk_end > walk_start))
    throw InvalidSpan("mark_windows: walk_end must exceed walk_start");
  if (!(t > 0.0)) throw InvalidSpan("mark_windows: window size must be positive");

  std::vector<TimeWindow> windows;
  int k = 0;
  // Tolerate representation error when the span is an exact multiple of t.
  while (walk_start + (k + 1) * t <= walk_end + 1e-9) {
    windows.push_back({k, walk_start + k * t, walk_start + (k + 1) * t, t, false});
    ++k;
  }
  const double rest = walk_end - (walk_start + k * t);
  if (rest > 1e-9)
    windows.push_back({k, walk_start + k * t, walk_end, t, true});
  return windows;
}

EventVector quantify_event(const AlignedFrame& frame, const TimeWindow& window,
                           const IsovistDescriptor& iso) {
  double sums[5] = {0, 0, 0, 0, 0};
  static const Channel env[5] = {Channel::sound_db, Channel::dust_mg_m3,
                                 Channel::temp_c, Channel::humidity_pct,
                                 Channel::illuminance_lux};
  std::size_t count = 0;
  std::size_t first_row = 0;
  for (std::size_t r = 0; r < frame.timestamps.size(); ++r) {
    const double ts = frame.timestamps[r];
    if (ts < window.start || ts >= window.end) continue;
    if (count == 0) first_row = r;
    for (int c = 0; c < 5; ++c) sums[c] += frame.column(env[c])[r];
    ++count;
  }
  if (count == 0)
    throw EmptyWindow("quantify_event: no frame samples in window " +
                      std::to_string(window.index));

  EventVector e;
  e.window = window;
  e.sound_db = sums[0] / count;
  e.dust_mg_m3 = sums[1] / count;
  e.temp_c = sums[2] / count;
  e.humidity_pct = sums[3] / count;
  e.illuminance_lux = sums[4] / count;
  e.isovist = iso;
  e.gps_lat = frame.column(Channel::gps_lat)[first_row];
  e.gps_lon = frame.column(Channel::gps_lon)[first_row];
  return e;
}

ParticipantDataset pair(const std::string& participant_id,
                        const std::vector<EventVector>& events,
                        const std::vector<ResponseLabel>& responses) {
  if (events.size() != responses.size())
    throw LengthMismatch("pair: " + std::to_string(events.size()) + " events vs " +
                         std::to_string(responses.size()) + " responses");

  std::map<int, const ResponseLabel*> by_index;
  for (const ResponseLabel& r : responses) {
    if (!by_index.emplace(r.window.index, &r).second)
      throw IndexMismatch("pair: duplicate response for window " +
                          std::to_string(r.window.index));
  }

  ParticipantDataset ds;
  ds.participant_id = participant_id;
  ds.rows.reserve(events.size());
  for (const EventVector& e : events) {
    const auto it = by_index.find(e.window.index);
    if (it == by_index.end())
      throw IndexMismatch("pair: no response for window " +
                          std::to_string(e.window.index));
    ds.rows.emplace_back(e, *it->second);
  }
  return ds;
}

CompiledDataset stack(const std::vector<ParticipantDataset>& participants) {
  CompiledDataset out;
  out.participants = static_cast<int>(participants.size());
  for (const ParticipantDataset& p : participants) {
    for (const auto& [event, response] : p.rows) {
      CompiledRow row;
      row.participant_id = p.participant_id;
      row.window_index = event.window.index;
      row.features = event.features();
      row.nscr = response.nscr;
      row.binary = response.binary;
      row.multiclass = response.multiclass;
      row.gps_lat = event.gps_lat;
      row.gps_lon = event.gps_lon;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace walksense
