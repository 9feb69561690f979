// Acceptance gate: one self-contained check per line, pinned tolerances and
// wall-clock budgets, nonzero exit when anything fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "support/raster.hpp"
#include "support/synthdata.hpp"
#include "walksense/arousal.hpp"
#include "walksense/config.hpp"
#include "walksense/eda_prep.hpp"
#include "walksense/featsel.hpp"
#include "walksense/fuzzy.hpp"
#include "walksense/geomap.hpp"
#include "walksense/ingest.hpp"
#include "walksense/io.hpp"
#include "walksense/isovist.hpp"
#include "walksense/pipeline.hpp"
#include "walksense/predictors.hpp"
#include "walksense/som.hpp"
#include "walksense/synth.hpp"

using namespace walksense;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw CheckFailed(what);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("walksense_accept_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(bool(in), "cannot open " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void flip_fraction(Table& t, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(t.rows());
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n = std::size_t(std::lround(fraction * double(t.rows())));
  for (std::size_t i = 0; i < n; ++i)
    t.y[idx[i]] = (t.y[idx[i]] + 1) % t.num_classes();
}

// ------------------------------------------------------------------ checks

void check_metric_arithmetic() {
  const auto t0 = Clock::now();
  const Metrics la = confusion_metrics({3105, 405, 2162, 396});
  const Metrics ha = confusion_metrics({161, 236, 5346, 325});
  const double dt = seconds_since(t0);

  const auto close = [](std::optional<double> got, double exact,
                        double published, const std::string& name) {
    require(got.has_value(), name + " absent");
    require(std::fabs(*got - exact) <= 1e-12, name + " off the exact quotient");
    require(std::fabs(*got - published) <= 0.005,
            name + " beyond 0.005 of the published value");
  };
  close(la.recall, 3105.0 / 3501.0, 0.89, "recall");
  close(la.sensitivity, 3105.0 / 3501.0, 0.89, "sensitivity");
  close(la.precision, 3105.0 / 3510.0, 0.88, "precision");
  close(la.specificity, 2162.0 / 2567.0, 0.84, "specificity");
  close(la.accuracy, 5267.0 / 6068.0, 0.868, "accuracy");
  close(ha.recall, 161.0 / 486.0, 0.33, "second recall");
  close(ha.specificity, 5346.0 / 5582.0, 0.96, "second specificity");
  require(dt < 1e-3, "metric computation exceeded 1 ms");
}

void check_swt_roundtrip() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> step(0.0, 0.05);
  const auto t0 = Clock::now();
  for (int s = 0; s < 100; ++s) {
    std::vector<double> x(1024);
    double level = 2.0 + 0.001 * s;
    for (std::size_t i = 0; i < x.size(); ++i) {
      level += step(rng);
      x[i] = level + 0.3 * std::sin(0.01 * double(i));
    }
    const std::vector<double> back = inverse_swt(swt_haar(x));
    require(back.size() == x.size(), "length changed");
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      err = std::max(err, std::fabs(back[i] - x[i]));
    require(err <= 1e-9, "round-trip error above 1e-9");
  }
  require(seconds_since(t0) < 1.0, "100 round-trips exceeded 1 s");
}

void check_upsample_affine() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> slope(-5.0, 5.0);
  std::uniform_real_distribution<double> intercept(-100.0, 100.0);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = slope(rng), b = intercept(rng);
    SignalStream s;
    s.channel = Channel::sound_db;
    for (int k = 0; k < 40; ++k) {
      const double t = 1000.0 + 2.5 * k;
      s.samples.push_back({t, a * t + b});
    }
    const SignalStream up = upsample_linear(s, 1.0);
    require(up.samples.size() >= 98, "upsample dropped the span");
    for (std::size_t i = 0; i < up.samples.size(); ++i) {
      const double t = up.samples[i].t;
      if (i) require(std::fabs(t - up.samples[i - 1].t - 1.0) <= 1e-9,
                     "grid spacing is not 1 s");
      require(std::fabs(up.samples[i].value - (a * t + b)) <= 1e-9,
              "affine value error above 1e-9");
    }
  }
}

void check_isovist_field() {
  const double fov = M_PI;
  const double step = M_PI / 180.0;
  const ObstacleMap open;
  const std::vector<Point> field =
      visibility_polygon({0.0, 0.0}, 0.0, open, fov, 100.0, step);
  const IsovistDescriptor d = descriptors(field, open, 100.0);
  require(std::fabs(d.area - 15707.96) / 15707.96 <= 0.005,
          "open-field area off the half-disc");
  require(std::fabs(d.perimeter - 514.16) / 514.16 <= 0.005,
          "open-field perimeter off the half-disc");

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ahead(20.0, 60.0);
  std::uniform_real_distribution<double> side(-40.0, 40.0);
  std::uniform_real_distribution<double> half(2.0, 12.0);
  ObstacleMap last;
  for (int trial = 0; trial < 3; ++trial) {
    const double cx = ahead(rng), cy = side(rng), h = half(rng);
    ObstacleMap m;
    m.polygons.push_back({{cx - h, cy - h},
                          {cx + h, cy - h},
                          {cx + h, cy + h},
                          {cx - h, cy + h}});
    last = m;
    const std::vector<Point> poly =
        visibility_polygon({0.0, 0.0}, 0.0, m, fov, 100.0, step);
    const double area = descriptors(poly, m, 100.0).area;
    const double oracle = testsupport::raster_visible_area(
        {0.0, 0.0}, 0.0, m, fov, 100.0, 0.25);
    require(std::fabs(area - oracle) / oracle <= 0.02,
            "rectangle-map area beyond 2% of the raster oracle");
  }

  const auto t0 = Clock::now();
  for (int i = 0; i < 100; ++i) {
    const Point origin{-0.25 * double(i), 0.0};
    const std::vector<Point> poly =
        visibility_polygon(origin, 0.0, last, fov, 100.0, step);
    (void)descriptors(poly, last, 100.0);
  }
  require(seconds_since(t0) < 5.0, "100 positions exceeded 5 s");
}

void check_arousal_closure() {
  RunConfig c;
  c.seed = 505;
  c.synth.participants = 10;
  c.synth.noise_scale = 0.0;
  require(c.synth.pulse_amp_lo >= 0.02, "planted pulses under 0.02 uS");
  long total = 0, match = 0;
  for (int i = 0; i < c.synth.participants; ++i) {
    const WalkSpec spec = synth_walk_spec(c, i);
    const GeneratedWalk w = generate_walk(spec);
    const SignalStream smoothed =
        smooth_swt(w.streams[int(Channel::eda_us)], c.theta, c.threshold_mode);
    const Decomposition dec = decompose(smoothed, c.cda);
    const std::vector<ScrEvent> events = detect_scr(dec, c.scr);
    for (const WindowTruth& t : w.windows) {
      TimeWindow win;
      win.index = int(t.index);
      win.start = t.start;
      win.end = t.end;
      win.width_t = t.end - t.start;
      ++total;
      if (count_nscr(events, win) == t.nscr) ++match;
    }
  }
  require(total >= 1000, "too few windows generated");
  require(double(match) >= 0.98 * double(total),
          "per-window match below 98% (" + std::to_string(match) + "/" +
              std::to_string(total) + ")");

  RunConfig tiny = c;
  tiny.synth.participants = 2;
  tiny.synth.pulse_amp_lo = 0.005;
  tiny.synth.pulse_amp_hi = 0.005;
  for (int i = 0; i < tiny.synth.participants; ++i) {
    const WalkSpec spec = synth_walk_spec(tiny, i);
    const GeneratedWalk w = generate_walk(spec);
    const SignalStream smoothed =
        smooth_swt(w.streams[int(Channel::eda_us)], tiny.theta,
                   tiny.threshold_mode);
    const Decomposition dec = decompose(smoothed, tiny.cda);
    const std::vector<ScrEvent> events = detect_scr(dec, tiny.scr);
    long counted = 0;
    for (const WindowTruth& t : w.windows) {
      TimeWindow win;
      win.index = int(t.index);
      win.start = t.start;
      win.end = t.end;
      win.width_t = t.end - t.start;
      counted += count_nscr(events, win);
    }
    require(counted == 0, "0.005 uS pulses produced " +
                              std::to_string(counted) + " counted responses");
  }
}

void check_planted_rule() {
  const auto t0 = Clock::now();
  const fs::path dir = fresh_dir("rule");
  RunConfig c;
  c.out_dir = dir.string();
  c.seed = 606;
  c.synth.participants = 4;
  c.synth.noise_scale = 0.0;
  const SynthResult made = generate_dataset(c);
  RunConfig run = made.manifest;
  run.out_dir = (dir / "run").string();
  run_pipeline(run, {"fuse"});
  const CompiledDataset data =
      read_compiled((dir / "run" / "compiled.csv").string());
  const Table clean = make_table(data, Target::binary);

  PredictorSpec tree;
  tree.kind = PredictorKind::reptree;
  tree.seed = 1;
  const CvResult clean_cv = cross_validate(tree, clean, 10);
  require(clean_cv.accuracy >= 0.95,
          "clean tree accuracy " + std::to_string(clean_cv.accuracy));

  Table noisy = clean;
  flip_fraction(noisy, 0.10, 99);
  const CvResult noisy_cv = cross_validate(tree, noisy, 10);
  require(noisy_cv.accuracy >= 0.80,
          "noisy tree accuracy " + std::to_string(noisy_cv.accuracy));

  FuriaParams fp;
  fp.seed = 1;
  FuriaClassifier furia(fp);
  furia.train(clean);
  double lo0 = 1e300, hi0 = -1e300, lo4 = 1e300, hi4 = -1e300;
  for (const auto& row : clean.x) {
    lo0 = std::min(lo0, row[0]);
    hi0 = std::max(hi0, row[0]);
    lo4 = std::min(lo4, row[4]);
    hi4 = std::max(hi4, row[4]);
  }
  double sound_miss = 1e300, lux_miss = 1e300;
  for (const FuzzyRule& rule : furia.rules()) {
    if (rule.consequent != 1) continue;
    for (const FuzzyAntecedent& a : rule.antecedents) {
      if (a.feature == 0 && a.op == RuleOp::ge)
        sound_miss = std::min(sound_miss, std::fabs(a.core - 66.0));
      if (a.feature == 4 && a.op == RuleOp::le)
        lux_miss = std::min(lux_miss, std::fabs(a.core - 580.0));
    }
  }
  require(sound_miss <= 0.05 * (hi0 - lo0),
          "sound bound missed by " + std::to_string(sound_miss));
  require(lux_miss <= 0.05 * (hi4 - lo4),
          "illuminance bound missed by " + std::to_string(lux_miss));

  const CvResult fuzzy_cv = cross_validate_with(
      [&]() { return std::make_unique<FuriaClassifier>(fp); }, noisy, 10, 1);
  require(fuzzy_cv.accuracy >= 0.65,
          "noisy fuzzy accuracy " + std::to_string(fuzzy_cv.accuracy));
  require(seconds_since(t0) < 60.0, "planted-rule run exceeded 60 s");
  fs::remove_all(dir);
}

void check_rate_sweep() {
  const fs::path dir = fresh_dir("sweep");
  RunConfig c;
  c.seed = 707;
  c.synth.participants = 3;
  c.synth.noise_scale = 1.0;

  // hard-edged programs so window width, not ramp blur, drives the errors
  RunConfig manifest;
  manifest.seed = c.seed;
  const WalkSpec probe = synth_walk_spec(c, 0);
  manifest.walk_start = probe.start_time;
  manifest.walk_end = probe.start_time + c.synth.duration_s;
  std::map<std::string, std::vector<double>> onsets;
  for (int i = 0; i < c.synth.participants; ++i) {
    WalkSpec spec = synth_walk_spec(c, i);
    for (StepEvent& s : spec.sound.steps) s.ramp_s = 0.0;
    for (StepEvent& s : spec.illuminance.steps) s.ramp_s = 0.0;
    const GeneratedWalk w = generate_walk(spec);
    const fs::path pdir = dir / "data" / spec.participant_id;
    fs::create_directories(pdir);
    write_walk(w, pdir.string());
    manifest.participants.push_back({spec.participant_id, pdir.string()});
    onsets[spec.participant_id] = w.pulse_onsets;
  }

  PredictorSpec tree;
  tree.kind = PredictorKind::reptree;
  tree.seed = 1;
  tree.params["min_leaf"] = 5;  // keep micro-leaf noise out of the comparison
  std::map<int, std::pair<double, double>> rates;  // width -> (tpr, fpr)
  for (const int width : {5, 10, 15, 20, 25}) {
    RunConfig run = manifest;
    run.window_seconds = double(width);
    run.out_dir = (dir / ("w" + std::to_string(width))).string();
    run_pipeline(run, {"fuse"});
    CompiledDataset data =
        read_compiled((fs::path(run.out_dir) / "compiled.csv").string());
    // labels from the planted pulses re-binned at this width, so the sweep
    // isolates quantification coarseness from detection noise
    for (CompiledRow& row : data.rows) {
      const double a = manifest.walk_start + double(width) * row.window_index;
      const double b = a + double(width);
      int n = 0;
      for (const double t : onsets[row.participant_id])
        if (t >= a && t < b) ++n;
      row.nscr = n;
      const auto labels = label(n);
      row.binary = labels.first;
      row.multiclass = labels.second;
    }
    const Table table = make_table(data, Target::binary);
    const CvResult cv = cross_validate(tree, table, 10);
    const ConfusionCounts a = cv.counts[1];
    require(a.tp + a.fn > 0 && a.fp + a.tn > 0, "degenerate class split");
    rates[width] = {double(a.tp) / double(a.tp + a.fn),
                    double(a.fp) / double(a.fp + a.tn)};
  }
  const auto [tpr5, fpr5] = rates[5];
  const auto [tpr25, fpr25] = rates[25];
  require(tpr5 > tpr25,
          "5 s TPR " + std::to_string(tpr5) + " not above 25 s TPR " +
              std::to_string(tpr25));
  require(fpr5 <= fpr25,
          "5 s FPR " + std::to_string(fpr5) + " above 25 s FPR " +
              std::to_string(fpr25));
  fs::remove_all(dir);
}

void check_bfe_recovery() {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const CompiledDataset d =
        testsupport::planted_rule_compiled(600, 100 + unsigned(seed));
    PredictorSpec tree;
    tree.kind = PredictorKind::reptree;
    tree.seed = seed;
    FeatselOptions opts;
    opts.target = Target::binary;
    opts.seed = seed;
    const FeatselHierarchy h = backward_eliminate(d, {tree}, opts);
    require(h.ladders.size() == 1, "one ladder expected");
    const std::vector<LadderStep>& steps = h.ladders[0].steps;
    require(steps.size() == 9, "ladder must run 9 down to 1");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      require(steps[i].subset.size() == 9 - i, "ladder sizes must step by 1");
      require(std::is_sorted(steps[i].subset.begin(), steps[i].subset.end()),
              "subsets must be sorted");
      if (i) {
        require(std::includes(steps[i - 1].subset.begin(),
                              steps[i - 1].subset.end(),
                              steps[i].subset.begin(), steps[i].subset.end()),
                "ladder is not a strict subset chain");
      }
    }
    const std::vector<int> want{0, 4};
    if (steps[7].subset == want) ++hits;
  }
  require(hits >= 9, "informative pair survived only " + std::to_string(hits) +
                         "/10 runs");
}

void check_som_separation() {
  const CompiledDataset d = testsupport::two_cluster_compiled(6000, 909);
  SomParams params;  // 20x20, rough + fine-tune defaults
  params.seed = 9;
  const auto t0 = Clock::now();
  const SomGrid som = train_som(d, params);
  const double train_s = seconds_since(t0);
  require(train_s < 30.0, "training exceeded 30 s");

  std::set<int> quiet, aroused;
  for (const CompiledRow& r : d.rows) {
    const int j = bmu_node(
        som, std::vector<double>(r.features.begin(), r.features.end()));
    (r.binary == BinaryLabel::A ? aroused : quiet).insert(j);
  }
  for (const int j : quiet)
    require(!aroused.count(j), "clusters share BMU node " + std::to_string(j));

  const std::vector<std::vector<double>> u = u_matrix(som);
  std::vector<double> used;
  double max_boundary = 0.0;
  bool any_boundary = false;
  for (int gy = 0; gy < som.height; ++gy)
    for (int gx = 0; gx < som.width; ++gx) {
      const int j = som.node_at(gx, gy);
      if (quiet.count(j) || aroused.count(j)) {
        used.push_back(u[gy][gx]);
      } else {
        any_boundary = true;
        max_boundary = std::max(max_boundary, u[gy][gx]);
      }
    }
  require(any_boundary && !used.empty(), "degenerate BMU layout");
  std::nth_element(used.begin(), used.begin() + used.size() / 2, used.end());
  const double median_used = used[used.size() / 2];
  require(max_boundary > 2.0 * median_used,
          "no ridge: boundary " + std::to_string(max_boundary) +
              " vs intra median " + std::to_string(median_used));

  require(som.qe_trace.size() == std::size_t(params.epochs + params.finetune + 1),
          "quantization trace length");
  const double rough_end = som.qe_trace[params.epochs];
  require(som.qe_trace.back() <= rough_end + 1e-12,
          "quantization error rose in the fine-tune phase");
}

void check_geo_aggregation() {
  const double lat0 = 52.52, lon0 = 13.405;
  const auto at = [&](const std::string& id, double east, double north,
                      int nscr) {
    CompiledRow r;
    r.participant_id = id;
    r.nscr = nscr;
    r.gps_lat = lat0 + north / 111194.9;
    r.gps_lon = lon0 + east / (111194.9 * std::cos(lat0 * M_PI / 180.0));
    return r;
  };
  CompiledDataset d;
  d.participants = 3;
  d.rows.push_back(at("p01", 1.0, 1.0, 2));
  d.rows.push_back(at("p01", 3.0, 3.0, 4));
  d.rows.push_back(at("p02", 2.0, 2.0, 5));
  d.rows.push_back(at("p02", 25.0, 5.0, 1));
  d.rows.push_back(at("p03", 55.0, 55.0, 8));
  std::vector<GeoBin> bins = bin(d, 10.0);
  normalize(bins);

  CompiledDataset doubled = d;
  doubled.rows.push_back(at("p01", 1.5, 1.5, 2));
  doubled.rows.push_back(at("p01", 3.5, 3.5, 4));
  std::vector<GeoBin> again = bin(doubled, 10.0);
  normalize(again);
  require(bins.size() == again.size(), "bin layout changed");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    require(bins[i].gx == again[i].gx && bins[i].gy == again[i].gy,
            "bin keys changed");
    require(bins[i].r_mean == again[i].r_mean,
            "duplicated rows moved a cell mean");
  }

  double lo = 1e300, hi = -1e300;
  bool saw_zero = false, saw_one = false;
  for (const GeoBin& b : bins) {
    lo = std::min(lo, b.r_norm);
    hi = std::max(hi, b.r_norm);
    if (b.r_norm == 0.0) saw_zero = true;
    if (b.r_norm == 1.0) saw_one = true;
  }
  require(saw_zero && lo == 0.0, "minimum did not normalize to exactly 0");
  require(saw_one && hi == 1.0, "maximum did not normalize to exactly 1");
}

void check_pipeline_determinism() {
  const fs::path dir = fresh_dir("e2e");
  RunConfig c;
  c.out_dir = dir.string();
  c.seed = 1111;
  c.synth.participants = 30;
  c.synth.duration_s = 1740.0;
  c.synth.corrupt_type1 = 1;
  c.synth.corrupt_type2 = 1;
  const SynthResult made = generate_dataset(c);

  RunConfig run_a = made.manifest;
  run_a.out_dir = (dir / "a").string();
  const auto t0 = Clock::now();
  const RunReport report = run_pipeline(run_a, all_stages());
  const double full_s = seconds_since(t0);
  require(report.ok, "pipeline did not finish clean");
  require(report.windows_compiled > 0, "nothing compiled");
  require(full_s < 60.0,
          "full run took " + std::to_string(full_s) + " s, budget 60 s");

  RunConfig run_b = made.manifest;
  run_b.out_dir = (dir / "b").string();
  run_pipeline(run_b, all_stages());

  for (const char* name :
       {"compiled.csv", "qc_report.csv", "metrics.csv", "roc.csv", "rules.txt",
        "rule_ranges.csv", "featsel.csv", "som_u.csv", "som_l.csv",
        "response_map.geojson"}) {
    require(file_bytes(dir / "a" / name) == file_bytes(dir / "b" / name),
            std::string(name) + " differs between reruns");
  }
  fs::remove_all(dir);
}

struct Entry {
  const char* name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  const std::vector<Entry> checks = {
      {"01 metric-arithmetic", check_metric_arithmetic},
      {"02 swt-roundtrip", check_swt_roundtrip},
      {"03 upsample-affine", check_upsample_affine},
      {"04 isovist-field", check_isovist_field},
      {"05 arousal-closure", check_arousal_closure},
      {"06 planted-rule", check_planted_rule},
      {"07 rate-sweep", check_rate_sweep},
      {"08 bfe-recovery", check_bfe_recovery},
      {"09 som-separation", check_som_separation},
      {"10 geo-aggregation", check_geo_aggregation},
      {"11 pipeline-determinism", check_pipeline_determinism},
  };
  int failed = 0;
  for (const Entry& entry : checks) {
    const auto t0 = Clock::now();
    try {
      entry.fn();
      std::printf("[pass] %s (%.2f s)\n", entry.name, seconds_since(t0));
    } catch (const std::exception& e) {
      ++failed;
      std::printf("[FAIL] %s: %s\n", entry.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failed) {
    std::printf("%d of %zu checks failed\n", failed, checks.size());
    return 1;
  }
  std::printf("all %zu checks passed\n", checks.size());
  return 0;
}
