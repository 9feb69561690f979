#include "walksense/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace walksense {

const std::vector<double>& AlignedFrame::column(Channel c) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == c) return columns[i];
  throw Error("aligned frame has no column for channel " +
              std::string(channel_name(c)));
}

SignalStream upsample_linear(const SignalStream& stream, double target_hz) {
  if (stream.size() < 2)
    throw TooFewSamples("upsample needs at least 2 samples, got " +
                        std::to_string(stream.size()));
  if (target_hz < stream.nominal_hz)
    throw DownsampleRequested("target " + std::to_string(target_hz) +
                              " Hz below nominal " +
                              std::to_string(stream.nominal_hz) + " Hz");

  const double dt = 1.0 / target_hz;
  const double t0 = stream.start();
  const double t_last = stream.end();

  SignalStream out;
  out.participant_id = stream.participant_id;
  out.channel = stream.channel;
  out.nominal_hz = target_hz;

  const auto& in = stream.samples;
  std::size_t seg = 0;  // current bracketing segment [seg, seg+1]
  const long n_out = static_cast<long>(std::floor((t_last - t0) / dt + 1e-9)) + 1;
  out.samples.reserve(n_out);
  for (long k = 0; k < n_out; ++k) {
    const double t = t0 + k * dt;
    while (seg + 2 < in.size() && in[seg + 1].t < t) ++seg;
    const double ta = in[seg].t, tb = in[seg + 1].t;
    const double va = in[seg].value, vb = in[seg + 1].value;
    const double w = (tb > ta) ? (t - ta) / (tb - ta) : 0.0;
    out.samples.push_back({t, va + w * (vb - va)});
  }
  return out;
}

AlignedFrame align(const std::vector<SignalStream>& streams, double snap_tolerance_s) {
  if (streams.empty()) throw NoOverlap("no streams to align");

  double grid_start = -std::numeric_limits<double>::infinity();
  double grid_end = std::numeric_limits<double>::infinity();
  for (const auto& s : streams) {
    if (s.empty()) throw NoOverlap("empty stream for channel " +
                                   std::string(channel_name(s.channel)));
    grid_start = std::max(grid_start, s.start());
    grid_end = std::min(grid_end, s.end());
  }
  if (grid_end < grid_start)
    throw NoOverlap("streams do not overlap in time");

  const long n_grid = static_cast<long>(std::floor(grid_end - grid_start + 1e-9)) + 1;

  AlignedFrame frame;
  frame.participant_id = streams.front().participant_id;

  // Per stream: value at each grid point, NaN where nothing snaps close enough.
  std::vector<std::vector<double>> snapped(streams.size());
  for (std::size_t si = 0; si < streams.size(); ++si) {
    auto& col = snapped[si];
    col.assign(n_grid, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> best(n_grid, std::numeric_limits<double>::infinity());
    for (const auto& sample : streams[si].samples) {
      const long g = std::lround(sample.t - grid_start);
      if (g < 0 || g >= n_grid) continue;
      const double err = std::abs(sample.t - (grid_start + g));
      if (err <= snap_tolerance_s && err < best[g]) {
        best[g] = err;
        col[g] = sample.value;
      }
    }
  }

  frame.channels.reserve(streams.size());
  for (const auto& s : streams) frame.channels.push_back(s.channel);
  frame.columns.assign(streams.size(), {});

  for (long g = 0; g < n_grid; ++g) {
    bool complete = true;
    for (const auto& col : snapped)
      if (std::isnan(col[g])) complete = false;
    if (!complete) {
      ++frame.rows_dropped;
      continue;
    }
    frame.timestamps.push_back(grid_start + g);
    for (std::size_t si = 0; si < streams.size(); ++si)
      frame.columns[si].push_back(snapped[si][g]);
  }
  return frame;
}

}  // namespace walksense
