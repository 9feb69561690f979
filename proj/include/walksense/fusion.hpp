#pragma once
// Window marking, per-window event quantification, event/response pairing
// and stacking of participants into the compiled dataset.

#include <vector>

#include "walksense/ingest.hpp"
#include "walksense/types.hpp"

namespace walksense {

struct InvalidSpan : Error {
  using Error::Error;
};
struct EmptyWindow : Error {
  using Error::Error;
};
struct IndexMismatch : Error {
  using Error::Error;
};

// Tiles [walk_start, walk_end) with windows of width t seconds. A trailing
// remainder shorter than t is returned flagged partial; downstream stages
// drop it from the dataset.
std::vector<TimeWindow> mark_windows(double walk_start, double walk_end,
                                     double t = 5.0);

// Arithmetic means of the five environment channels over the frame rows
// whose timestamps fall in [window.start, window.end); GPS is the
// window-start fix; isovist fields are copied through.
EventVector quantify_event(const AlignedFrame& frame, const TimeWindow& window,
                           const IsovistDescriptor& iso);

// Zips events with responses by window index, not by position.
ParticipantDataset pair(const std::string& participant_id,
                        const std::vector<EventVector>& events,
                        const std::vector<ResponseLabel>& responses);

// Concatenates participants in order into one flat table.
CompiledDataset stack(const std::vector<ParticipantDataset>& participants);

}  // namespace walksense
