#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "walksense/io.hpp"
#include "walksense/types.hpp"

using namespace walksense;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("channel names round-trip and rates match the acquisition setup") {
  for (int c = 0; c < kNumChannels; ++c) {
    const Channel ch = static_cast<Channel>(c);
    CHECK(channel_from_name(channel_name(ch)) == ch);
  }
  CHECK(channel_nominal_hz(Channel::gps_lat) == 1.0);
  CHECK(channel_nominal_hz(Channel::gps_lon) == 1.0);
  CHECK(channel_nominal_hz(Channel::sound_db) == doctest::Approx(0.4));
  CHECK(channel_nominal_hz(Channel::dust_mg_m3) == doctest::Approx(0.4));
  CHECK(channel_nominal_hz(Channel::temp_c) == 1.0);
  CHECK(channel_nominal_hz(Channel::humidity_pct) == 1.0);
  CHECK(channel_nominal_hz(Channel::illuminance_lux) == 1.0);
  CHECK(channel_nominal_hz(Channel::eda_us) == 4.0);
  CHECK_THROWS_AS(channel_from_name("bogus"), Error);
}

TEST_CASE("feature order is stable and indexable by name") {
  REQUIRE(kFeatureNames.size() == 9);
  CHECK(std::string(kFeatureNames[0]) == "sound_db");
  CHECK(std::string(kFeatureNames[4]) == "illuminance_lux");
  CHECK(std::string(kFeatureNames[5]) == "iso_area");
  for (int f = 0; f < kNumFeatures; ++f)
    CHECK(feature_index(kFeatureNames[f]) == f);
  CHECK_THROWS_AS(feature_index("nope"), Error);
}

TEST_CASE("label names round-trip") {
  CHECK(binary_from_name(label_name(BinaryLabel::N)) == BinaryLabel::N);
  CHECK(binary_from_name(label_name(BinaryLabel::A)) == BinaryLabel::A);
  CHECK(multiclass_from_name(label_name(MulticlassLabel::LA)) ==
        MulticlassLabel::LA);
  CHECK(multiclass_from_name(label_name(MulticlassLabel::HA)) ==
        MulticlassLabel::HA);
}

TEST_CASE("format_double survives a parse round-trip") {
  const double vals[] = {0.0,    -0.0,   0.1,  1.0 / 3.0, 1e-9,
                         -2.5e7, 1740.0, 66.0, 1460453400.25};
  for (const double v : vals) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("parse_timestamp accepts plain seconds and ISO-8601") {
  CHECK(parse_timestamp("1717632000.25") == doctest::Approx(1717632000.25));
  CHECK(parse_timestamp("2016-04-12T09:30:00Z") == 1460453400.0);
  CHECK(parse_timestamp("2016-04-12T09:30:00.25Z") ==
        doctest::Approx(1460453400.25));
  CHECK(parse_timestamp("2024-02-29T23:59:59Z") == 1709251199.0);
  CHECK(parse_timestamp("1970-01-02T00:00:00Z") == 86400.0);
  CHECK_THROWS_AS(parse_timestamp("not-a-time"), Error);
}

TEST_CASE("read_stream sorts, deduplicates and keeps the last duplicate") {
  const std::string path = temp_file(
      "ws_core_stream.csv", "ts,value\n3.0,30\n1.0,10\n2.0,20\n1.0,11\n");
  const SignalStream s = read_stream(path, Channel::sound_db, "p01");
  REQUIRE(s.size() == 3);
  CHECK(s.samples[0].t == 1.0);
  CHECK(s.samples[0].value == 11.0);
  CHECK(s.samples[2].value == 30.0);
  CHECK(s.participant_id == "p01");
  CHECK(s.channel == Channel::sound_db);
  std::remove(path.c_str());
}

TEST_CASE("read_stream rejects malformed rows and empty files") {
  const std::string bad = temp_file("ws_core_bad.csv", "1.0,2.0\noops\n");
  CHECK_THROWS_AS(read_stream(bad, Channel::sound_db), MalformedRow);
  const std::string empty = temp_file("ws_core_empty.csv", "");
  CHECK_THROWS_AS(read_stream(empty, Channel::sound_db), EmptyFile);
  CHECK_THROWS_AS(read_stream("/nonexistent/x.csv", Channel::sound_db),
                  IoFailure);
  std::remove(bad.c_str());
  std::remove(empty.c_str());
}

TEST_CASE("stream write/read round-trip is exact") {
  SignalStream s;
  s.participant_id = "p07";
  s.channel = Channel::eda_us;
  s.nominal_hz = 4.0;
  for (int i = 0; i < 50; ++i)
    s.samples.push_back({1744450200.0 + 0.25 * i, 2.0 + 1e-9 * i * i});
  const std::string path =
      (std::filesystem::temp_directory_path() / "ws_core_rt.csv").string();
  write_stream(s, path);
  const SignalStream back = read_stream(path, Channel::eda_us, "p07");
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.samples[i].t == s.samples[i].t);
    CHECK(back.samples[i].value == s.samples[i].value);
  }
  std::remove(path.c_str());
}

TEST_CASE("compiled dataset write/read round-trip is exact") {
  CompiledDataset d;
  d.participants = 2;
  for (int i = 0; i < 6; ++i) {
    CompiledRow r;
    r.participant_id = i < 3 ? "p01" : "p02";
    r.window_index = i % 3;
    for (int f = 0; f < kNumFeatures; ++f) r.features[f] = 0.1 * i + 1e-7 * f;
    r.nscr = i;
    r.binary = i % 2 ? BinaryLabel::A : BinaryLabel::N;
    r.multiclass = i >= 4 ? MulticlassLabel::HA
                          : (i % 2 ? MulticlassLabel::LA : MulticlassLabel::N);
    r.gps_lat = 52.52 + 1e-5 * i;
    r.gps_lon = 13.405 - 1e-5 * i;
    d.rows.push_back(r);
  }
  const std::string path =
      (std::filesystem::temp_directory_path() / "ws_core_comp.csv").string();
  write_compiled(d, path);
  const CompiledDataset back = read_compiled(path);
  REQUIRE(back.size() == d.size());
  CHECK(back.participants == 2);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(back.rows[i] == d.rows[i]);

  const LabelCounts counts = summarize(back);
  CHECK(counts.total == 6);
  CHECK(counts.binary_a == 3);
  CHECK(counts.binary_n == 3);
  CHECK(counts.multi_ha == 2);
  std::remove(path.c_str());

  CompiledDataset empty;
  CHECK_THROWS_AS(write_compiled(empty, path), EmptyDataset);
}
