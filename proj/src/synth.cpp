#include "walksense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "walksense/arousal.hpp"
#include "walksense/fusion.hpp"
#include "walksense/io.hpp"

namespace walksense {

namespace {

// Trapezoid profile of one step event: 0 outside [s,e), full delta on the
// plateau, linear shoulders of width r clipped to half the span.
double step_value(const StepEvent& ev, double t) {
  if (t < ev.start_s || t >= ev.end_s) return 0.0;
  const double r = std::min(ev.ramp_s, 0.5 * (ev.end_s - ev.start_s));
  if (r <= 0.0) return ev.delta;
  if (t < ev.start_s + r) return ev.delta * (t - ev.start_s) / r;
  if (t > ev.end_s - r) return ev.delta * (ev.end_s - t) / r;
  return ev.delta;
}

// Exact integral of the piecewise-linear profile over [a, b].
double step_integral(const StepEvent& ev, double a, double b) {
  const double r = std::min(ev.ramp_s, 0.5 * (ev.end_s - ev.start_s));
  const double cuts[4] = {ev.start_s, ev.start_s + r, ev.end_s - r, ev.end_s};
  double total = 0.0;
  double x0 = std::max(a, cuts[0]);
  for (int k = 0; k < 3; ++k) {
    const double hi = std::min(b, cuts[k + 1]);
    if (x0 >= hi) {
      x0 = std::max(x0, cuts[k + 1]);
      continue;
    }
    // each piece is linear, so the midpoint value integrates it exactly and
    // sidesteps the boundary discontinuity of a hard step
    total += step_value(ev, 0.5 * (x0 + hi)) * (hi - x0);
    x0 = hi;
  }
  return total;
}

Point path_position(const std::vector<Point>& waypoints, double speed,
                    double t_rel) {
  double remaining = speed * t_rel;
  Point prev{0.0, 0.0};
  for (const Point& w : waypoints) {
    const double leg = std::hypot(w.x - prev.x, w.y - prev.y);
    if (remaining <= leg && leg > 0.0) {
      const double f = remaining / leg;
      return {prev.x + f * (w.x - prev.x), prev.y + f * (w.y - prev.y)};
    }
    remaining -= leg;
    prev = w;
  }
  return prev;  // path exhausted, stand at the final waypoint
}

void validate(const WalkSpec& spec) {
  if (spec.duration_s <= 0.0) throw SpecInvalid("synth: duration must be positive");
  if (spec.window_seconds <= 0.0)
    throw SpecInvalid("synth: window width must be positive");
  if (spec.pulse_amp_lo > spec.pulse_amp_hi || spec.pulse_amp_lo < 0.0)
    throw SpecInvalid("synth: bad pulse amplitude range");
  if (!(spec.tau1 > spec.tau2) || spec.tau2 <= 0.0)
    throw SpecInvalid("synth: need tau1 > tau2 > 0");
  if (spec.speed_mps < 0.0) throw SpecInvalid("synth: negative speed");
  if (spec.participant_id.empty()) throw SpecInvalid("synth: empty participant id");
}

}  // namespace

double ChannelProgram::value_at(double t_rel) const {
  double v = baseline + trend_per_s * t_rel;
  for (const StepEvent& s : steps) v += step_value(s, t_rel);
  return v;
}

double ChannelProgram::mean_over(double a_rel, double b_rel) const {
  const double width = b_rel - a_rel;
  if (width <= 0.0) return value_at(a_rel);
  double v = baseline + trend_per_s * 0.5 * (a_rel + b_rel);
  for (const StepEvent& s : steps) v += step_integral(s, a_rel, b_rel) / width;
  return v;
}

bool PlantedRule::active() const {
  return std::isfinite(sound_above) || std::isfinite(illuminance_below);
}

bool PlantedRule::holds(double sound, double illuminance) const {
  if (std::isfinite(sound_above) && sound > sound_above) return true;
  if (std::isfinite(illuminance_below) && illuminance < illuminance_below)
    return true;
  return false;
}

GeneratedWalk generate_walk(const WalkSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GeneratedWalk walk;
  walk.participant_id = spec.participant_id;
  walk.streams.resize(kNumChannels);

  // Environment channels at their native rates, noise drawn in enum order.
  const auto fill = [&](Channel c, const ChannelProgram& prog) {
    SignalStream& s = walk.streams[static_cast<int>(c)];
    s.participant_id = spec.participant_id;
    s.channel = c;
    s.nominal_hz = channel_nominal_hz(c);
    const double dt = 1.0 / s.nominal_hz;
    for (double t = 0.0; t <= spec.duration_s + 1e-9; t += dt)
      s.samples.push_back({spec.start_time + t,
                           prog.value_at(t) + prog.noise_sd * gauss(rng)});
  };

  // GPS pair follows the waypoint path at constant speed.
  std::vector<Point> waypoints = spec.waypoints_m;
  if (waypoints.empty())
    waypoints.push_back({spec.speed_mps * spec.duration_s + 10.0, 0.0});
  for (const Channel c : {Channel::gps_lat, Channel::gps_lon}) {
    SignalStream& s = walk.streams[static_cast<int>(c)];
    s.participant_id = spec.participant_id;
    s.channel = c;
    s.nominal_hz = channel_nominal_hz(c);
    for (double t = 0.0; t <= spec.duration_s + 1e-9; t += 1.0) {
      const Point p = path_position(waypoints, spec.speed_mps, t);
      double lat = 0.0, lon = 0.0;
      unproject_gps(p, spec.start_lat, spec.start_lon, lat, lon);
      s.samples.push_back(
          {spec.start_time + t, c == Channel::gps_lat ? lat : lon});
    }
  }

  fill(Channel::sound_db, spec.sound);
  fill(Channel::dust_mg_m3, spec.dust);
  fill(Channel::temp_c, spec.temp);
  fill(Channel::humidity_pct, spec.humidity);
  fill(Channel::illuminance_lux, spec.illuminance);

  // Windows and the planted pulse schedule. Pulses go only into rule-active
  // full windows, grid-aligned, away from the edges, separated by the gap.
  const std::vector<TimeWindow> windows = mark_windows(
      spec.start_time, spec.start_time + spec.duration_s, spec.window_seconds);
  const double eda_dt = 1.0 / channel_nominal_hz(Channel::eda_us);
  const std::size_t eda_n =
      static_cast<std::size_t>(std::llround(spec.duration_s / eda_dt)) + 1;

  std::vector<double> driver(eda_n, 0.0);
  std::uniform_real_distribution<double> amp_dist(spec.pulse_amp_lo,
                                                  spec.pulse_amp_hi);
  const double impulse_scale =
      1.0 / (eda_dt * bateman_peak_value(spec.tau1, spec.tau2));

  for (const TimeWindow& w : windows) {
    if (w.partial) continue;
    WindowTruth truth;
    truth.index = w.index;
    truth.start = w.start;
    truth.end = w.end;
    const double a_rel = w.start - spec.start_time;
    const double b_rel = w.end - spec.start_time;
    truth.rule_active = spec.rule.active() &&
                        spec.rule.holds(spec.sound.mean_over(a_rel, b_rel),
                                        spec.illuminance.mean_over(a_rel, b_rel));
    if (truth.rule_active && spec.pulses_per_window > 0) {
      const double lo = a_rel + spec.pulse_edge_margin_s;
      const double hi = b_rel - spec.pulse_edge_margin_s;
      const double span = hi - lo;
      if (span >= 0.0) {
        const int fit =
            1 + static_cast<int>(std::floor(span / spec.pulse_min_gap_s));
        const int count = std::min(spec.pulses_per_window, fit);
        const double gap = count > 1 ? span / (count - 1) : 0.0;
        for (int k = 0; k < count; ++k) {
          const double t_rel = count > 1 ? lo + k * gap : 0.5 * (lo + hi);
          const auto idx =
              static_cast<std::size_t>(std::llround(t_rel / eda_dt));
          if (idx >= eda_n) continue;
          driver[idx] += amp_dist(rng) * impulse_scale;
          const double onset = spec.start_time + idx * eda_dt;
          walk.pulse_onsets.push_back(onset);
          if (onset >= w.start && onset < w.end) ++truth.nscr;
        }
      }
    }
    const auto labels = label(static_cast<int>(truth.nscr));
    truth.binary = labels.first;
    truth.multiclass = labels.second;
    walk.windows.push_back(truth);
  }

  // Forward model: tonic drift plus convolved pulses plus sensor noise.
  const std::vector<double> phasic =
      convolve_bateman(driver, spec.tau1, spec.tau2, eda_dt);
  SignalStream& eda = walk.streams[static_cast<int>(Channel::eda_us)];
  eda.participant_id = spec.participant_id;
  eda.channel = Channel::eda_us;
  eda.nominal_hz = channel_nominal_hz(Channel::eda_us);
  const double omega = spec.eda_wobble_period_s > 0.0
                           ? 2.0 * 3.14159265358979323846 / spec.eda_wobble_period_s
                           : 0.0;
  for (std::size_t i = 0; i < eda_n; ++i) {
    const double t = i * eda_dt;
    const double tonic = spec.eda_baseline_us + spec.eda_drift_per_s * t +
                         spec.eda_wobble_us * std::sin(omega * t);
    eda.samples.push_back({spec.start_time + t,
                           tonic + phasic[i] + spec.eda_noise_sd * gauss(rng)});
  }

  if (spec.corruption == Corruption::type1) {
    // Two-plateau square wave with every third sample lost.
    SignalStream broken;
    broken.participant_id = eda.participant_id;
    broken.channel = eda.channel;
    broken.nominal_hz = eda.nominal_hz;
    for (std::size_t i = 0; i < eda.samples.size(); ++i) {
      if (i % 3 == 2) continue;
      const double t = eda.samples[i].t - spec.start_time;
      const double level = std::fmod(t, 60.0) < 30.0 ? 0.2 : 0.8;
      broken.samples.push_back({eda.samples[i].t, level});
    }
    eda = std::move(broken);
  } else if (spec.corruption == Corruption::type2) {
    std::bernoulli_distribution drop(0.6);
    for (Sample& s : eda.samples)
      if (drop(rng)) s.value = 0.0;
  }

  return walk;
}

std::string stream_path(const std::string& dir, const std::string& participant,
                        Channel channel) {
  return dir + "/" + participant + "_" + channel_name(channel) + ".csv";
}

std::string truth_path(const std::string& dir, const std::string& participant) {
  return dir + "/" + participant + "_truth.csv";
}

std::string pulses_path(const std::string& dir, const std::string& participant) {
  return dir + "/" + participant + "_pulses.csv";
}

void write_walk(const GeneratedWalk& walk, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const SignalStream& s : walk.streams)
    write_stream(s, stream_path(dir, walk.participant_id, s.channel));

  const std::string path = truth_path(dir, walk.participant_id);
  std::ofstream out(path);
  if (!out) throw IoFailure("write_walk: cannot open " + path);
  out << "window_index,start,end,nscr,rule_active,binary,multiclass\n";
  for (const WindowTruth& w : walk.windows)
    out << w.index << ',' << format_double(w.start) << ','
        << format_double(w.end) << ',' << w.nscr << ','
        << (w.rule_active ? 1 : 0) << ',' << label_name(w.binary) << ','
        << label_name(w.multiclass) << '\n';
  if (!out) throw IoFailure("write_walk: write failed for " + path);

  const std::string ppath = pulses_path(dir, walk.participant_id);
  std::ofstream pout(ppath);
  if (!pout) throw IoFailure("write_walk: cannot open " + ppath);
  pout << "onset\n";
  for (const double t : walk.pulse_onsets) pout << format_double(t) << '\n';
  if (!pout) throw IoFailure("write_walk: write failed for " + ppath);
}

std::vector<double> read_pulses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("read_pulses: cannot open " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "onset") continue;
    out.push_back(std::stod(line));
  }
  return out;
}

std::vector<WindowTruth> read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("read_truth: cannot open " + path);
  std::vector<WindowTruth> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("window_index", 0) == 0) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      throw MalformedRow("read_truth: " + path + ":" + std::to_string(line_no));
    WindowTruth w;
    w.index = std::stol(fields[0]);
    w.start = std::stod(fields[1]);
    w.end = std::stod(fields[2]);
    w.nscr = std::stol(fields[3]);
    w.rule_active = fields[4] == "1";
    w.binary = fields[5] == "A" ? BinaryLabel::A : BinaryLabel::N;
    w.multiclass = fields[6] == "HA"   ? MulticlassLabel::HA
                   : fields[6] == "LA" ? MulticlassLabel::LA
                                       : MulticlassLabel::N;
    out.push_back(w);
  }
  if (out.empty()) throw EmptyFile("read_truth: " + path);
  return out;
}

}  // namespace walksense
