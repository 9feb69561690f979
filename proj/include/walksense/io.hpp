#pragma once
// Delimited-text I/O for sensor streams and the compiled dataset.
// Comma separated, UTF-8, LF line endings.

#include <string>

#include "walksense/types.hpp"

namespace walksense {

struct MalformedRow : Error {
  using Error::Error;
};
struct EmptyFile : Error {
  using Error::Error;
};
struct EmptyDataset : Error {
  using Error::Error;
};
struct IoFailure : Error {
  using Error::Error;
};

// Parses a two-column (timestamp,value) file. The header line is optional.
// Timestamps are either plain seconds or ISO-8601 strings, converted to
// float seconds since epoch (UTC) at parse time. Samples come back sorted;
// duplicate timestamps collapse keeping the last occurrence.
SignalStream read_stream(const std::string& path, Channel channel,
                         const std::string& participant_id = "");

void write_stream(const SignalStream& stream, const std::string& path);

// Compiled dataset schema, one row per (participant, window):
//   participant_id,window_index,<9 features>,nscr,binary,multiclass,gps_lat,gps_lon
// Floats are written with full precision so the round-trip is exact.
void write_compiled(const CompiledDataset& dataset, const std::string& path);
CompiledDataset read_compiled(const std::string& path);

struct LabelCounts {
  long total = 0;
  long binary_n = 0;
  long binary_a = 0;
  long multi_n = 0;
  long multi_la = 0;
  long multi_ha = 0;
};

LabelCounts summarize(const CompiledDataset& dataset);

// Accepts "1717632000.25" as well as "2016-04-12T09:30:00.25Z".
double parse_timestamp(const std::string& field);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace walksense
