#pragma once
// Frequency unification and timestamp alignment of the environment streams.
// Sound and dust arrive at 0.4 Hz and are linearly upsampled to the 1 Hz
// grid shared by GPS, temperature, humidity and illuminance.

#include <vector>

#include "walksense/types.hpp"

namespace walksense {

struct TooFewSamples : Error {
  using Error::Error;
};
struct DownsampleRequested : Error {
  using Error::Error;
};
struct NoOverlap : Error {
  using Error::Error;
};

struct AlignedFrame {
  std::string participant_id;
  std::vector<double> timestamps;              // shared 1 Hz grid
  std::vector<Channel> channels;               // column order
  std::vector<std::vector<double>> columns;    // columns[c][row]
  long rows_dropped = 0;                       // rows with a missing channel

  std::size_t rows() const { return timestamps.size(); }
  const std::vector<double>& column(Channel c) const;
};

// Linear interpolation onto a grid that starts at the first input timestamp
// with spacing 1/target_hz. Never extrapolates past the last input sample.
SignalStream upsample_linear(const SignalStream& stream, double target_hz);

// Samples every stream onto the shared 1 Hz grid spanning the intersection
// [max of first timestamps, min of last timestamps]. Stream samples snap to
// the nearest grid point within `snap_tolerance_s`; grid rows missing any
// channel are dropped and counted.
AlignedFrame align(const std::vector<SignalStream>& streams,
                   double snap_tolerance_s = 0.5);

}  // namespace walksense
