#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "walksense/ingest.hpp"

using namespace walksense;

namespace {

SignalStream make_stream(Channel ch, double t0, double dt, int n,
                         double (*f)(double)) {
  SignalStream s;
  s.participant_id = "p01";
  s.channel = ch;
  s.nominal_hz = 1.0 / dt;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + dt * i;
    s.samples.push_back({t, f(t)});
  }
  return s;
}

}  // namespace

TEST_CASE("upsampling an affine signal is exact") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = coef(rng), b = coef(rng);
    SignalStream s;
    s.channel = Channel::sound_db;
    s.nominal_hz = 0.4;
    for (int i = 0; i < 40; ++i) {
      const double t = 1000.0 + 2.5 * i;
      s.samples.push_back({t, a + b * t});
    }
    const SignalStream up = upsample_linear(s, 1.0);
    REQUIRE(up.size() >= 2);
    CHECK(up.nominal_hz == 1.0);
    double max_err = 0.0;
    for (const Sample& smp : up.samples)
      max_err = std::max(max_err, std::fabs(smp.value - (a + b * smp.t)));
    CHECK(max_err <= 1e-9);
  }
}

TEST_CASE("upsampling never extrapolates past the input span") {
  SignalStream s;
  s.channel = Channel::dust_mg_m3;
  s.nominal_hz = 0.4;
  for (int i = 0; i < 5; ++i) s.samples.push_back({10.0 + 2.5 * i, double(i)});
  const SignalStream up = upsample_linear(s, 1.0);
  CHECK(up.samples.front().t == 10.0);
  CHECK(up.samples.back().t <= 20.0 + 1e-12);
}

TEST_CASE("upsampling guards its inputs") {
  SignalStream s;
  s.channel = Channel::sound_db;
  s.nominal_hz = 0.4;
  s.samples.push_back({0.0, 1.0});
  CHECK_THROWS_AS(upsample_linear(s, 1.0), TooFewSamples);
  s.samples.push_back({2.5, 2.0});
  CHECK_THROWS_AS(upsample_linear(s, 0.2), DownsampleRequested);
}

TEST_CASE("alignment intersects spans and snaps within tolerance") {
  auto flat = [](double) { return 1.0; };
  auto ramp = [](double t) { return t; };
  std::vector<SignalStream> streams;
  streams.push_back(make_stream(Channel::gps_lat, 0.0, 1.0, 30, ramp));
  streams.push_back(make_stream(Channel::gps_lon, 2.0, 1.0, 30, flat));
  // offset by 0.4 s: still snaps to the shared grid
  streams.push_back(make_stream(Channel::sound_db, 0.4, 1.0, 32, ramp));
  streams.push_back(make_stream(Channel::dust_mg_m3, 0.0, 1.0, 40, flat));
  streams.push_back(make_stream(Channel::temp_c, 0.0, 1.0, 40, flat));
  streams.push_back(make_stream(Channel::humidity_pct, 0.0, 1.0, 40, flat));
  streams.push_back(make_stream(Channel::illuminance_lux, 0.0, 1.0, 40, flat));

  const AlignedFrame frame = align(streams, 0.5);
  REQUIRE(frame.rows() > 0);
  // the grid begins at the latest stream start
  CHECK(frame.timestamps.front() >= 2.0);
  CHECK(frame.column(Channel::gps_lat).size() == frame.rows());
  // snapped sound samples preserve their values
  const auto& sound = frame.column(Channel::sound_db);
  const auto& lat = frame.column(Channel::gps_lat);
  for (std::size_t r = 0; r + 1 < frame.rows(); ++r) {
    CHECK(frame.timestamps[r + 1] > frame.timestamps[r]);
    CHECK(std::fabs(sound[r] - (frame.timestamps[r] + 0.4)) <= 0.5);
    CHECK(lat[r] == frame.timestamps[r]);
  }
}

TEST_CASE("rows missing any channel are dropped and counted") {
  auto flat = [](double) { return 7.0; };
  std::vector<SignalStream> streams;
  streams.push_back(make_stream(Channel::gps_lat, 0.0, 1.0, 20, flat));
  streams.push_back(make_stream(Channel::gps_lon, 0.0, 1.0, 20, flat));
  // sparse channel present only every 4 s: 3 of 4 grid rows lack it
  streams.push_back(make_stream(Channel::sound_db, 0.0, 4.0, 5, flat));
  const AlignedFrame frame = align(streams, 0.4);
  CHECK(frame.rows() == 5);
  CHECK(frame.rows_dropped > 0);
  CHECK(frame.rows() + static_cast<std::size_t>(frame.rows_dropped) >= 17);
}

TEST_CASE("alignment with disjoint spans reports no overlap") {
  auto flat = [](double) { return 1.0; };
  std::vector<SignalStream> streams;
  streams.push_back(make_stream(Channel::gps_lat, 0.0, 1.0, 10, flat));
  streams.push_back(make_stream(Channel::gps_lon, 100.0, 1.0, 10, flat));
  CHECK_THROWS_AS(align(streams, 0.5), NoOverlap);
}

TEST_CASE("column lookup rejects channels outside the frame") {
  auto flat = [](double) { return 1.0; };
  std::vector<SignalStream> streams;
  streams.push_back(make_stream(Channel::gps_lat, 0.0, 1.0, 10, flat));
  streams.push_back(make_stream(Channel::gps_lon, 0.0, 1.0, 10, flat));
  const AlignedFrame frame = align(streams, 0.5);
  CHECK_THROWS_AS(frame.column(Channel::eda_us), Error);
}
