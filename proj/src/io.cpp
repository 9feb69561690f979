#include "walksense/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace walksense {

namespace {

bool parse_double(const std::string& s, double* out) {
  const char* begin = s.c_str();
  const char* end = begin + s.size();
  auto res = std::from_chars(begin, end, *out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(*out);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool looks_like_header(const std::vector<std::string>& cols) {
  for (const auto& c : cols) {
    bool has_alpha = false;
    for (unsigned char ch : c)
      if (std::isalpha(ch) && ch != 'T' && ch != 'Z' && ch != 'e' && ch != 'E')
        has_alpha = true;
    if (has_alpha && c.find('-') == std::string::npos) return true;
  }
  return false;
}

}  // namespace

double parse_timestamp(const std::string& field) {
  double v = 0.0;
  if (parse_double(field, &v)) return v;

  // ISO-8601: YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]
  std::tm tm{};
  double frac = 0.0;
  int y, mo, d, h, mi;
  double sec;
  char sep;
  if (std::sscanf(field.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi,
                  &sec) == 7 &&
      (sep == 'T' || sep == ' ')) {
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = static_cast<int>(sec);
    frac = sec - tm.tm_sec;
    std::time_t t = timegm(&tm);
    if (t != static_cast<std::time_t>(-1)) return static_cast<double>(t) + frac;
  }
  throw MalformedRow("unparseable timestamp: '" + field + "'");
}

std::string format_double(double v) {
  char buf[40];
  // %.17g round-trips any double; try shorter forms first for readable files.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

SignalStream read_stream(const std::string& path, Channel channel,
                         const std::string& participant_id) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open stream file: " + path);

  SignalStream stream;
  stream.participant_id = participant_id;
  stream.channel = channel;
  stream.nominal_hz = channel_nominal_hz(channel);

  // keep-last collapse for duplicate timestamps
  std::map<double, double> by_time;

  std::string line;
  long line_no = 0;
  bool any_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cols = split_csv(t);
    if (line_no == 1 && looks_like_header(cols)) continue;
    any_content = true;
    if (cols.size() < 2)
      throw MalformedRow(path + ": line " + std::to_string(line_no) +
                         ": expected timestamp,value");
    double ts, value;
    try {
      ts = parse_timestamp(trim(cols[0]));
    } catch (const MalformedRow&) {
      throw MalformedRow(path + ": line " + std::to_string(line_no) +
                         ": bad timestamp '" + cols[0] + "'");
    }
    if (!parse_double(trim(cols[1]), &value))
      throw MalformedRow(path + ": line " + std::to_string(line_no) +
                         ": bad value '" + cols[1] + "'");
    by_time[ts] = value;
  }
  if (!any_content) throw EmptyFile("no samples in " + path);

  stream.samples.reserve(by_time.size());
  for (const auto& [ts, value] : by_time) stream.samples.push_back({ts, value});
  return stream;
}

void write_stream(const SignalStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path);
  out << "timestamp,value\n";
  for (const auto& s : stream.samples)
    out << format_double(s.t) << ',' << format_double(s.value) << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

void write_compiled(const CompiledDataset& dataset, const std::string& path) {
  if (dataset.empty()) throw EmptyDataset("refusing to write an empty dataset");
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path);

  out << "participant_id,window_index";
  for (const char* f : kFeatureNames) out << ',' << f;
  out << ",nscr,binary,multiclass,gps_lat,gps_lon\n";

  for (const auto& r : dataset.rows) {
    out << r.participant_id << ',' << r.window_index;
    for (double f : r.features) out << ',' << format_double(f);
    out << ',' << r.nscr << ',' << label_name(r.binary) << ','
        << label_name(r.multiclass) << ',' << format_double(r.gps_lat) << ','
        << format_double(r.gps_lon) << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path);
}

CompiledDataset read_compiled(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);

  constexpr int kCols = 2 + kNumFeatures + 3 + 2;
  CompiledDataset ds;
  std::string line;
  long line_no = 0;
  std::vector<std::string> seen_participants;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (line_no == 1) continue;  // header
    auto cols = split_csv(t);
    if (static_cast<int>(cols.size()) != kCols)
      throw MalformedRow(path + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(kCols) + " columns, got " +
                         std::to_string(cols.size()));
    CompiledRow r;
    r.participant_id = cols[0];
    r.window_index = std::stoi(cols[1]);
    for (int i = 0; i < kNumFeatures; ++i)
      if (!parse_double(cols[2 + i], &r.features[i]))
        throw MalformedRow(path + ": line " + std::to_string(line_no) +
                           ": bad feature '" + cols[2 + i] + "'");
    r.nscr = std::stoi(cols[2 + kNumFeatures]);
    r.binary = binary_from_name(cols[3 + kNumFeatures]);
    r.multiclass = multiclass_from_name(cols[4 + kNumFeatures]);
    if (!parse_double(cols[5 + kNumFeatures], &r.gps_lat) ||
        !parse_double(cols[6 + kNumFeatures], &r.gps_lon))
      throw MalformedRow(path + ": line " + std::to_string(line_no) + ": bad gps");
    if (std::find(seen_participants.begin(), seen_participants.end(),
                  r.participant_id) == seen_participants.end())
      seen_participants.push_back(r.participant_id);
    ds.rows.push_back(std::move(r));
  }
  if (ds.rows.empty()) throw EmptyFile("no rows in " + path);
  ds.participants = static_cast<int>(seen_participants.size());
  return ds;
}

LabelCounts summarize(const CompiledDataset& dataset) {
  LabelCounts c;
  for (const auto& r : dataset.rows) {
    ++c.total;
    (r.binary == BinaryLabel::N ? c.binary_n : c.binary_a)++;
    switch (r.multiclass) {
      case MulticlassLabel::N: ++c.multi_n; break;
      case MulticlassLabel::LA: ++c.multi_la; break;
      case MulticlassLabel::HA: ++c.multi_ha; break;
    }
  }
  return c;
}

}  // namespace walksense
