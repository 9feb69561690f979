#include "walksense/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "walksense/fusion.hpp"
#include "walksense/geomap.hpp"
#include "walksense/ingest.hpp"
#include "walksense/io.hpp"

namespace walksense {

namespace {

namespace fs = std::filesystem;

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - t0_).count();
    t0_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

struct ParticipantWork {
  std::string id;
  std::string dir;
  AlignedFrame frame;
  SignalStream eda;  // original, truncated when a marks file is present
  SignalStream eda_smoothed;
  ProfileClass qc;
  bool kept = true;
  Decomposition dec;
  std::vector<ScrEvent> events;
  std::vector<TimeWindow> windows;               // full windows with rows
  std::vector<IsovistDescriptor> descriptors;    // parallel to windows
  ParticipantDataset dataset;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoFailure("pipeline: cannot open " + path);
  out << text;
  if (!out) throw IoFailure("pipeline: write failed for " + path);
}

std::string aligned_csv(const AlignedFrame& frame) {
  std::ostringstream os;
  os << "ts";
  for (const Channel c : frame.channels) os << ',' << channel_name(c);
  os << '\n';
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    os << format_double(frame.timestamps[r]);
    for (std::size_t c = 0; c < frame.columns.size(); ++c)
      os << ',' << format_double(frame.columns[c][r]);
    os << '\n';
  }
  return os.str();
}

PredictorSpec spec_for(PredictorKind kind, const RunConfig& c) {
  PredictorSpec spec;
  spec.kind = kind;
  spec.seed = c.seed;
  switch (kind) {
    case PredictorKind::reptree:
      spec.params = {{"min_leaf", double(c.reptree.min_leaf)},
                     {"max_depth", double(c.reptree.max_depth)},
                     {"pruning", c.reptree.pruning ? 1.0 : 0.0},
                     {"holdout_fraction", c.reptree.holdout_fraction}};
      break;
    case PredictorKind::mlp:
      spec.params = {{"hidden", double(c.mlp.hidden)},
                     {"learning_rate", c.mlp.learning_rate},
                     {"momentum", c.mlp.momentum},
                     {"epochs", double(c.mlp.epochs)}};
      break;
    case PredictorKind::svm:
      spec.params = {{"c", c.svm.c},
                     {"gamma", c.svm.gamma},
                     {"epsilon", c.svm.epsilon},
                     {"max_passes", double(c.svm.max_passes)}};
      break;
  }
  return spec;
}

// Per-row headings from consecutive GPS fixes; stationary stretches reuse
// the last heading, leading stationary rows borrow the first one seen.
std::vector<double> row_headings(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> h(n, 0.0);
  std::vector<bool> known(n, false);
  HeadingTracker tracker;
  for (std::size_t i = 1; i < n; ++i) {
    try {
      h[i] = tracker.update(pts[i - 1], pts[i]);
      known[i] = true;
    } catch (const Error&) {
      // no motion yet
    }
  }
  for (std::size_t i = n; i-- > 1;)
    if (!known[i - 1] && known[i]) {
      h[i - 1] = h[i];
      known[i - 1] = true;
    }
  return h;
}

std::string metric_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::vector<std::string> all_stages() {
  return {"ingest", "qc",    "smooth",  "arousal", "isovist", "fuse",
          "train",  "fuzzy", "featsel", "som",     "geomap"};
}

std::string RunReport::text() const {
  std::ostringstream os;
  os << "walksense run report\n";
  os << "====================\n";
  os << "stages:\n";
  for (const StageInfo& s : stages) {
    os << "  " << s.name;
    for (std::size_t pad = s.name.size(); pad < 8; ++pad) os << ' ';
    os << ' ' << std::fixed;
    os.precision(3);
    os << s.seconds << " s";
    os.unsetf(std::ios::fixed);
    if (!s.note.empty()) os << "  " << s.note;
    os << '\n';
  }
  os << "rows dropped in alignment: " << rows_dropped << '\n';
  os << "windows compiled: " << windows_compiled << '\n';
  if (!discarded.empty()) {
    os << "discarded signals:\n";
    for (const std::string& d : discarded) os << "  " << d << '\n';
  }
  os << "status: " << (ok ? "ok" : "failed") << '\n';
  return os.str();
}

RunReport run_pipeline(const RunConfig& config,
                       const std::vector<std::string>& stages) {
  const std::vector<std::string> order = all_stages();
  std::set<std::string> want;
  int max_rank = -1;
  for (const std::string& s : stages) {
    const auto it = std::find(order.begin(), order.end(), s);
    if (it == order.end()) throw Error("run_pipeline: unknown stage " + s);
    want.insert(s);
    max_rank = std::max(max_rank, int(it - order.begin()));
  }
  if (want.empty()) throw Error("run_pipeline: no stages requested");

  validate_config(config);
  fs::create_directories(config.out_dir);
  const std::string out = config.out_dir + "/";
  const int data_depth = std::min(max_rank, 5);  // ingest..fuse are ranks 0..5

  RunReport report;
  Timer timer;
  const auto finish_stage = [&](const std::string& name,
                                const std::string& note) {
    report.stages.push_back({name, timer.lap(), note});
  };
  const auto fail = [&](const std::string& stage_name,
                        const Error& cause) -> void {
    report.ok = false;
    report.stages.push_back({stage_name, timer.lap(), cause.what()});
    try {
      write_text(out + "report.txt", report.text());
    } catch (const Error&) {
      // report write is best effort on the failure path
    }
    throw StageFailure(stage_name + ": " + cause.what());
  };

  // ---- ingest ----
  std::vector<ParticipantWork> work;
  try {
    for (const ParticipantEntry& entry : config.participants) {
      ParticipantWork w;
      w.id = entry.id;
      w.dir = entry.dir;
      std::vector<SignalStream> env;
      for (int ch = 0; ch < kNumChannels; ++ch) {
        const Channel channel = static_cast<Channel>(ch);
        SignalStream s =
            read_stream(stream_path(entry.dir, entry.id, channel), channel,
                        entry.id);
        if (channel == Channel::eda_us) {
          w.eda = std::move(s);
        } else {
          if (s.nominal_hz < 1.0) s = upsample_linear(s, 1.0);
          env.push_back(std::move(s));
        }
      }
      const std::string marks = entry.dir + "/" + entry.id + "_marks.csv";
      if (fs::exists(marks)) w.eda = truncate(w.eda, read_marks(marks));
      w.frame = align(env, config.snap_tolerance_s);
      report.rows_dropped += w.frame.rows_dropped;
      if (want.count("ingest"))
        write_text(out + w.id + "_aligned.csv", aligned_csv(w.frame));
      work.push_back(std::move(w));
    }
  } catch (const Error& e) {
    fail("ingest", e);
  }
  finish_stage("ingest", std::to_string(work.size()) + " participants");

  // ---- qc ----
  long kept_count = 0;
  try {
    std::ostringstream qc_csv;
    qc_csv << "participant,verdict,two_level_fraction,zero_fraction,"
              "loss_fraction,kept\n";
    for (ParticipantWork& w : work) {
      w.qc = classify_profile(w.eda, config.qc);
      w.kept = w.qc.verdict == ProfileVerdict::Clean;
      if (w.kept) {
        ++kept_count;
      } else {
        std::ostringstream why;
        why << w.id << ": " << verdict_name(w.qc.verdict)
            << " two_level=" << format_double(w.qc.two_level_fraction)
            << " zero=" << format_double(w.qc.zero_fraction)
            << " loss=" << format_double(w.qc.loss_fraction);
        report.discarded.push_back(why.str());
      }
      qc_csv << w.id << ',' << verdict_name(w.qc.verdict) << ','
             << format_double(w.qc.two_level_fraction) << ','
             << format_double(w.qc.zero_fraction) << ','
             << format_double(w.qc.loss_fraction) << ',' << (w.kept ? 1 : 0)
             << '\n';
    }
    if (want.count("qc")) write_text(out + "qc_report.csv", qc_csv.str());
  } catch (const Error& e) {
    fail("qc", e);
  }
  finish_stage("qc", std::to_string(kept_count) + " kept, " +
                         std::to_string(work.size() - kept_count) +
                         " discarded");
  if (data_depth < 2) {
    write_text(out + "report.txt", report.text());
    return report;
  }

  // ---- smooth ----
  try {
    for (ParticipantWork& w : work) {
      if (!w.kept) continue;
      w.eda_smoothed = smooth_swt(w.eda, config.theta, config.threshold_mode);
      if (want.count("smooth")) {
        write_stream(w.eda, out + w.id + "_eda.csv");
        write_stream(w.eda_smoothed, out + w.id + "_eda_smoothed.csv");
      }
    }
  } catch (const Error& e) {
    fail("smooth", e);
  }
  finish_stage("smooth", std::to_string(kept_count) + " streams");
  if (data_depth < 3) {
    write_text(out + "report.txt", report.text());
    return report;
  }

  // ---- arousal ----
  long total_events = 0;
  try {
    std::ostringstream summary;
    summary << "participant,tau1,tau2,residual_rmse,events\n";
    for (ParticipantWork& w : work) {
      if (!w.kept) continue;
      w.dec = decompose(w.eda_smoothed, config.cda);
      w.events = detect_scr(w.dec, config.scr);
      total_events += long(w.events.size());
      if (want.count("arousal")) {
        std::ostringstream scr;
        scr << "onset,peak_time,amplitude\n";
        for (const ScrEvent& ev : w.events)
          scr << format_double(ev.onset) << ',' << format_double(ev.peak_time)
              << ',' << format_double(ev.amplitude) << '\n';
        write_text(out + w.id + "_scr.csv", scr.str());
      }
      summary << w.id << ',' << format_double(w.dec.tau1) << ','
              << format_double(w.dec.tau2) << ','
              << format_double(w.dec.residual_rmse) << ',' << w.events.size()
              << '\n';
    }
    if (want.count("arousal"))
      write_text(out + "arousal_summary.csv", summary.str());
  } catch (const Error& e) {
    fail("arousal", e);
  }
  finish_stage("arousal", std::to_string(total_events) + " responses");
  if (data_depth < 4) {
    write_text(out + "report.txt", report.text());
    return report;
  }

  // ---- isovist ----
  long total_windows = 0;
  try {
    for (ParticipantWork& w : work) {
      if (!w.kept) continue;
      if (w.frame.rows() == 0) throw EmptyStream("isovist: empty frame " + w.id);
      const double origin_lat = w.frame.column(Channel::gps_lat)[0];
      const double origin_lon = w.frame.column(Channel::gps_lon)[0];
      ObstacleMap obstacles;
      if (!config.isovist.obstacles_path.empty())
        obstacles = load_obstacles(config.isovist.obstacles_path, origin_lat,
                                   origin_lon);

      std::vector<Point> pts(w.frame.rows());
      for (std::size_t r = 0; r < w.frame.rows(); ++r)
        pts[r] = project_gps(w.frame.column(Channel::gps_lat)[r],
                             w.frame.column(Channel::gps_lon)[r], origin_lat,
                             origin_lon);
      const std::vector<double> headings = row_headings(pts);

      const double walk_start = config.walk_start != 0.0
                                    ? config.walk_start
                                    : w.frame.timestamps.front();
      const double walk_end = config.walk_end != 0.0
                                  ? config.walk_end
                                  : w.frame.timestamps.back();
      const std::vector<TimeWindow> marks =
          mark_windows(walk_start, walk_end, config.window_seconds);

      std::ostringstream iso_csv;
      iso_csv << "window_index,area_m2,perimeter_m,compactness,occlusivity\n";
      std::size_t row = 0;
      for (const TimeWindow& win : marks) {
        if (win.partial) continue;
        while (row < w.frame.rows() && w.frame.timestamps[row] < win.start)
          ++row;
        if (row >= w.frame.rows() || w.frame.timestamps[row] >= win.end)
          continue;  // no aligned rows inside, window dropped on both sides
        const std::vector<Point> polygon = visibility_polygon(
            pts[row], headings[row], obstacles,
            config.isovist.fov_deg * kDegToRad, config.isovist.radius_m,
            config.isovist.angular_step_deg * kDegToRad);
        const IsovistDescriptor desc =
            descriptors(polygon, obstacles, config.isovist.radius_m);
        w.windows.push_back(win);
        w.descriptors.push_back(desc);
        iso_csv << win.index << ',' << format_double(desc.area) << ','
                << format_double(desc.perimeter) << ','
                << format_double(desc.compactness) << ','
                << format_double(desc.occlusivity) << '\n';
      }
      total_windows += long(w.windows.size());
      if (want.count("isovist"))
        write_text(out + w.id + "_isovist.csv", iso_csv.str());
    }
  } catch (const Error& e) {
    fail("isovist", e);
  }
  finish_stage("isovist", std::to_string(total_windows) + " windows");
  if (data_depth < 5) {
    write_text(out + "report.txt", report.text());
    return report;
  }

  // ---- fuse ----
  CompiledDataset compiled;
  try {
    std::vector<ParticipantDataset> datasets;
    for (ParticipantWork& w : work) {
      if (!w.kept) continue;
      std::vector<EventVector> events;
      std::vector<ResponseLabel> responses;
      events.reserve(w.windows.size());
      for (std::size_t i = 0; i < w.windows.size(); ++i) {
        events.push_back(
            quantify_event(w.frame, w.windows[i], w.descriptors[i]));
        ResponseLabel r;
        r.window = w.windows[i];
        r.nscr = count_nscr(w.events, w.windows[i]);
        const auto labels = label(r.nscr, config.ha_boundary);
        r.binary = labels.first;
        r.multiclass = labels.second;
        responses.push_back(r);
      }
      w.dataset = pair(w.id, events, responses);
      datasets.push_back(w.dataset);
    }
    compiled = stack(datasets);
    report.windows_compiled = long(compiled.size());
    if (want.count("fuse")) write_compiled(compiled, out + "compiled.csv");
  } catch (const Error& e) {
    fail("fuse", e);
  }
  finish_stage("fuse", std::to_string(report.windows_compiled) + " rows");

  // ---- train ----
  if (want.count("train")) {
    try {
      const Table table = make_table(compiled, config.target);
      std::ostringstream metrics_csv;
      metrics_csv << "predictor,class,tp,fp,tn,fn,recall,precision,"
                     "sensitivity,specificity,accuracy\n";
      std::ostringstream roc_csv;
      roc_csv << "predictor,fpr,tpr\n";
      std::string note;
      for (const PredictorKind kind : config.train_kinds) {
        const CvResult cv =
            cross_validate(spec_for(kind, config), table, config.folds);
        for (int cls = 0; cls < table.num_classes(); ++cls) {
          const ConfusionCounts& cc = cv.counts[cls];
          const Metrics& m = cv.metrics[cls];
          metrics_csv << predictor_name(kind) << ',' << table.class_names[cls]
                      << ',' << cc.tp << ',' << cc.fp << ',' << cc.tn << ','
                      << cc.fn << ',' << metric_cell(m.recall) << ','
                      << metric_cell(m.precision) << ','
                      << metric_cell(m.sensitivity) << ','
                      << metric_cell(m.specificity) << ','
                      << metric_cell(m.accuracy) << '\n';
        }
        metrics_csv << predictor_name(kind) << ",pooled,,,,,,,,,"
                    << format_double(cv.accuracy) << '\n';
        if (config.target == Target::binary) {
          std::vector<RocPoint> points =
              roc_points(table.y, cv.scores, 1);
          for (const RocPoint& p : points)
            roc_csv << predictor_name(kind) << ',' << format_double(p.fpr)
                    << ',' << format_double(p.tpr) << '\n';
        }
        if (!note.empty()) note += ' ';
        note += std::string(predictor_name(kind)) + "=" +
                format_double(cv.accuracy);
      }
      write_text(out + "metrics.csv", metrics_csv.str());
      if (config.target == Target::binary)
        write_text(out + "roc.csv", roc_csv.str());
      finish_stage("train", note);
    } catch (const Error& e) {
      fail("train", e);
    }
  }

  // ---- fuzzy ----
  if (want.count("fuzzy")) {
    try {
      const Table table = make_table(compiled, config.target);
      const std::vector<CrispRule> crisp = induce_crisp(table, config.furia);
      std::vector<FuzzyRule> rules;
      for (const CrispRule& r : crisp)
        rules.push_back(fuzzify(r, table, config.furia));
      write_text(out + "rules.txt", format_rules(rules, table));
      write_text(out + "rule_ranges.csv",
                 format_ranges(rule_ranges(rules, table)));
      finish_stage("fuzzy", std::to_string(rules.size()) + " rules");
    } catch (const Error& e) {
      fail("fuzzy", e);
    }
  }

  // ---- featsel ----
  if (want.count("featsel")) {
    try {
      std::vector<PredictorSpec> specs;
      for (const PredictorKind kind : config.featsel_kinds)
        specs.push_back(spec_for(kind, config));
      FeatselOptions opts = config.featsel;
      opts.target = config.target;
      const FeatselHierarchy h = backward_eliminate(compiled, specs, opts);
      write_text(out + "featsel.csv", format_hierarchy(h));
      finish_stage("featsel", std::to_string(h.ladders.size()) + " ladders");
    } catch (const Error& e) {
      fail("featsel", e);
    }
  }

  // ---- som ----
  if (want.count("som")) {
    try {
      const SomGrid som = train_som(compiled, config.som);
      write_text(out + "som_u.csv", format_matrix(u_matrix(som)));
      for (int f = 0; f < kNumFeatures; ++f)
        write_text(out + "som_f_" + kFeatureNames[f] + ".csv",
                   format_matrix(f_matrix(som, f)));
      write_text(out + "som_l.csv", format_labels(l_matrix(som, compiled)));
      finish_stage("som",
                   "qe=" + format_double(som.qe_trace.empty()
                                             ? 0.0
                                             : som.qe_trace.back()));
    } catch (const Error& e) {
      fail("som", e);
    }
  }

  // ---- geomap ----
  if (want.count("geomap")) {
    try {
      std::vector<GeoBin> bins = bin(compiled, config.geomap.grid_meters,
                                     config.geomap.divide_by_total);
      normalize(bins);
      export_geojson(bins, out + "response_map.geojson");
      finish_stage("geomap", std::to_string(bins.size()) + " bins");
    } catch (const Error& e) {
      fail("geomap", e);
    }
  }

  write_text(out + "report.txt", report.text());
  return report;
}

WalkSpec synth_walk_spec(const RunConfig& config, int index) {
  validate_synth(config);
  const SynthConfig& sc = config.synth;

  WalkSpec spec;
  std::ostringstream id;
  id << 'p';
  if (index + 1 < 10) id << '0';
  id << index + 1;
  spec.participant_id = id.str();
  spec.seed = config.seed * 1000003ULL + std::uint64_t(index);
  spec.duration_s = sc.duration_s;
  spec.window_seconds = sc.window_seconds;
  spec.pulse_amp_lo = sc.pulse_amp_lo;
  spec.pulse_amp_hi = sc.pulse_amp_hi;
  spec.rule.sound_above = sc.sound_above;
  spec.rule.illuminance_below = sc.illuminance_below;

  spec.sound.noise_sd *= sc.noise_scale;
  spec.dust.noise_sd *= sc.noise_scale;
  spec.temp.noise_sd *= sc.noise_scale;
  spec.humidity.noise_sd *= sc.noise_scale;
  spec.illuminance.noise_sd *= sc.noise_scale;
  spec.eda_noise_sd *= sc.noise_scale;

  // Per-participant flavor so rows are not clones across the cohort.
  std::mt19937_64 rng(spec.seed ^ 0xC0FFEE5ULL);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  spec.sound.baseline = 55.0 + 2.0 * jitter(rng);
  spec.temp.baseline = 15.0 + 2.0 * jitter(rng);
  spec.humidity.baseline = 55.0 + 5.0 * jitter(rng);
  spec.illuminance.baseline = 820.0 + 60.0 * jitter(rng);
  spec.dust.baseline = 0.03 + 0.01 * jitter(rng);
  spec.temp.trend_per_s = 0.0005 * jitter(rng);
  spec.humidity.trend_per_s = 0.001 * jitter(rng);

  // Loud and dark segments aligned to window boundaries with ramped
  // shoulders, so window means sweep across the planted thresholds. Segments
  // of one channel never touch each other (one spare window between them):
  // stacked steps would break the amplitude bounds and smear, via the 0.4 Hz
  // interpolation, into their quiet neighbors.
  const double t = sc.window_seconds;
  const long n_windows = long(std::floor(sc.duration_s / t));
  const long usable = n_windows - 2;
  if (usable > 6) {
    const long segments = std::max<long>(1, n_windows / 30);
    const auto place = [&](ChannelProgram& ch, double amp_lo, double amp_hi) {
      std::uniform_int_distribution<long> pos(1, usable - 6);
      std::uniform_int_distribution<long> len(3, 6);
      std::uniform_real_distribution<double> amp(amp_lo, amp_hi);
      std::uniform_real_distribution<double> ramp(0.8, 2.2);
      std::vector<char> used(std::size_t(n_windows), 0);
      for (long s = 0; s < segments; ++s)
        for (int attempt = 0; attempt < 200; ++attempt) {
          const long at = pos(rng);
          const long span = len(rng);
          bool free = true;
          for (long w = at - 1; w <= at + span && free; ++w)
            if (used[std::size_t(w)]) free = false;
          if (!free) continue;
          for (long w = at - 1; w <= at + span; ++w) used[std::size_t(w)] = 1;
          ch.steps.push_back(
              {at * t, (at + span) * t, amp(rng), ramp(rng) * t});
          break;
        }
    };
    if (std::isfinite(sc.sound_above)) place(spec.sound, 13.0, 17.0);
    if (std::isfinite(sc.illuminance_below))
      place(spec.illuminance, -430.0, -330.0);
  }

  const int clean = sc.participants - sc.corrupt_type1 - sc.corrupt_type2;
  if (index >= clean && index < clean + sc.corrupt_type1)
    spec.corruption = Corruption::type1;
  else if (index >= clean + sc.corrupt_type1)
    spec.corruption = Corruption::type2;
  return spec;
}

SynthResult generate_dataset(const RunConfig& config) {
  validate_synth(config);
  fs::create_directories(config.out_dir);

  SynthResult result;
  result.manifest = config;
  result.manifest.participants.clear();
  result.manifest.window_seconds = config.synth.window_seconds;
  // Pin the window tiling to the generated span; alignment trims the last
  // couple of seconds off the 0.4 Hz channels, which must not shift windows.
  result.manifest.walk_start = WalkSpec{}.start_time;
  result.manifest.walk_end = WalkSpec{}.start_time + config.synth.duration_s;

  for (int i = 0; i < config.synth.participants; ++i) {
    const WalkSpec spec = synth_walk_spec(config, i);
    const GeneratedWalk walk = generate_walk(spec);
    const std::string dir = config.out_dir + "/data/" + spec.participant_id;
    write_walk(walk, dir);
    result.manifest.participants.push_back({spec.participant_id, dir});
    result.participant_ids.push_back(spec.participant_id);
  }

  result.config_path = config.out_dir + "/synth_config.json";
  save_config(result.manifest, result.config_path);
  return result;
}

}  // namespace walksense
