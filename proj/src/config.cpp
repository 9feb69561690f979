#include "walksense/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nlohmann/json.hpp"
#include "walksense/io.hpp"

namespace walksense {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigInvalid("config: " + where + ": " + what);
}

void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) bad(where, "unknown key '" + key + "'");
  }
}

double num(const json& obj, const std::string& where, const std::string& key,
           double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) bad(where, "'" + key + "' must be a number");
  return obj[key].get<double>();
}

bool flag(const json& obj, const std::string& where, const std::string& key,
          bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) bad(where, "'" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::string text(const json& obj, const std::string& where,
                 const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) bad(where, "'" + key + "' must be a string");
  return obj[key].get<std::string>();
}

std::vector<PredictorKind> parse_kinds(const std::string& list,
                                       const std::string& where) {
  std::vector<PredictorKind> kinds;
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      kinds.push_back(predictor_from_name(item));
    } catch (const Error&) {
      bad(where, "unknown predictor '" + item + "'");
    }
  }
  if (kinds.empty()) bad(where, "no predictors named");
  return kinds;
}

std::string kinds_text(const std::vector<PredictorKind>& kinds) {
  std::string out;
  for (const PredictorKind k : kinds) {
    if (!out.empty()) out += ',';
    out += predictor_name(k);
  }
  return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("config: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigInvalid("config: " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigInvalid("config: top level must be an object");
  expect_keys(doc, "top level",
              {"participants", "out_dir", "seed", "window_seconds",
               "ha_boundary", "snap_tolerance_s", "walk_start", "walk_end",
               "eda", "arousal", "isovist", "geomap", "ml", "featsel", "som",
               "synth"});

  RunConfig c;
  if (doc.contains("participants")) {
    if (!doc["participants"].is_array())
      bad("participants", "must be an array");
    for (const json& p : doc["participants"]) {
      if (!p.is_object()) bad("participants", "entries must be objects");
      expect_keys(p, "participants", {"id", "dir"});
      ParticipantEntry entry;
      entry.id = text(p, "participants", "id", "");
      entry.dir = text(p, "participants", "dir", "");
      if (entry.id.empty() || entry.dir.empty())
        bad("participants", "entries need id and dir");
      c.participants.push_back(entry);
    }
  }

  c.out_dir = text(doc, "top level", "out_dir", c.out_dir);
  c.seed = static_cast<std::uint64_t>(num(doc, "top level", "seed", double(c.seed)));
  c.window_seconds = num(doc, "top level", "window_seconds", c.window_seconds);
  c.snap_tolerance_s = num(doc, "top level", "snap_tolerance_s", c.snap_tolerance_s);
  c.walk_start = num(doc, "top level", "walk_start", c.walk_start);
  c.walk_end = num(doc, "top level", "walk_end", c.walk_end);
  const std::string boundary = text(doc, "top level", "ha_boundary", "ge6");
  if (boundary == "ge6")
    c.ha_boundary = HaBoundary::ge6;
  else if (boundary == "gt6")
    c.ha_boundary = HaBoundary::gt6;
  else
    bad("ha_boundary", "must be ge6 or gt6");

  if (doc.contains("eda")) {
    const json& e = doc["eda"];
    expect_keys(e, "eda",
                {"theta", "threshold_mode", "qc_two_level", "qc_zero", "qc_loss"});
    c.theta = num(e, "eda", "theta", c.theta);
    const std::string mode = text(e, "eda", "threshold_mode", "clamp");
    if (mode == "clamp")
      c.threshold_mode = ThresholdMode::clamp;
    else if (mode == "zero_above")
      c.threshold_mode = ThresholdMode::zero_above;
    else
      bad("eda.threshold_mode", "must be clamp or zero_above");
    c.qc.two_level = num(e, "eda", "qc_two_level", c.qc.two_level);
    c.qc.zero = num(e, "eda", "qc_zero", c.qc.zero);
    c.qc.loss = num(e, "eda", "qc_loss", c.qc.loss);
  }

  if (doc.contains("arousal")) {
    const json& a = doc["arousal"];
    expect_keys(a, "arousal",
                {"tau1_init", "tau2_init", "optim_restarts", "tonic_sigma_s",
                 "driver_sigma_s", "rmse_cap", "min_duration_s",
                 "amp_threshold", "rise_min_s", "rise_max_s", "merge_eps"});
    c.cda.tau1_init = num(a, "arousal", "tau1_init", c.cda.tau1_init);
    c.cda.tau2_init = num(a, "arousal", "tau2_init", c.cda.tau2_init);
    c.cda.optim_restarts =
        int(num(a, "arousal", "optim_restarts", c.cda.optim_restarts));
    c.cda.tonic_sigma_s = num(a, "arousal", "tonic_sigma_s", c.cda.tonic_sigma_s);
    c.cda.driver_sigma_s =
        num(a, "arousal", "driver_sigma_s", c.cda.driver_sigma_s);
    c.cda.rmse_cap = num(a, "arousal", "rmse_cap", c.cda.rmse_cap);
    c.cda.min_duration_s =
        num(a, "arousal", "min_duration_s", c.cda.min_duration_s);
    c.scr.amp_threshold = num(a, "arousal", "amp_threshold", c.scr.amp_threshold);
    c.scr.rise_min_s = num(a, "arousal", "rise_min_s", c.scr.rise_min_s);
    c.scr.rise_max_s = num(a, "arousal", "rise_max_s", c.scr.rise_max_s);
    c.scr.merge_eps = num(a, "arousal", "merge_eps", c.scr.merge_eps);
  }

  if (doc.contains("isovist")) {
    const json& i = doc["isovist"];
    expect_keys(i, "isovist",
                {"fov_deg", "radius_m", "angular_step_deg", "obstacles"});
    c.isovist.fov_deg = num(i, "isovist", "fov_deg", c.isovist.fov_deg);
    c.isovist.radius_m = num(i, "isovist", "radius_m", c.isovist.radius_m);
    c.isovist.angular_step_deg =
        num(i, "isovist", "angular_step_deg", c.isovist.angular_step_deg);
    c.isovist.obstacles_path = text(i, "isovist", "obstacles", "");
  }

  if (doc.contains("geomap")) {
    const json& g = doc["geomap"];
    expect_keys(g, "geomap", {"grid_meters", "divide_by_total"});
    c.geomap.grid_meters = num(g, "geomap", "grid_meters", c.geomap.grid_meters);
    c.geomap.divide_by_total =
        flag(g, "geomap", "divide_by_total", c.geomap.divide_by_total);
  }

  if (doc.contains("ml")) {
    const json& m = doc["ml"];
    expect_keys(m, "ml", {"target", "folds", "train", "reptree", "mlp", "svm",
                          "furia"});
    const std::string target = text(m, "ml", "target", "binary");
    if (target == "binary")
      c.target = Target::binary;
    else if (target == "multiclass")
      c.target = Target::multiclass;
    else
      bad("ml.target", "must be binary or multiclass");
    c.folds = int(num(m, "ml", "folds", c.folds));
    c.train_kinds = parse_kinds(text(m, "ml", "train", kinds_text(c.train_kinds)),
                                "ml.train");
    if (m.contains("reptree")) {
      const json& r = m["reptree"];
      expect_keys(r, "ml.reptree",
                  {"min_leaf", "max_depth", "pruning", "holdout_fraction"});
      c.reptree.min_leaf = int(num(r, "ml.reptree", "min_leaf", c.reptree.min_leaf));
      c.reptree.max_depth =
          int(num(r, "ml.reptree", "max_depth", c.reptree.max_depth));
      c.reptree.pruning = flag(r, "ml.reptree", "pruning", c.reptree.pruning);
      c.reptree.holdout_fraction =
          num(r, "ml.reptree", "holdout_fraction", c.reptree.holdout_fraction);
    }
    if (m.contains("mlp")) {
      const json& p = m["mlp"];
      expect_keys(p, "ml.mlp",
                  {"hidden", "learning_rate", "momentum", "epochs"});
      c.mlp.hidden = int(num(p, "ml.mlp", "hidden", c.mlp.hidden));
      c.mlp.learning_rate =
          num(p, "ml.mlp", "learning_rate", c.mlp.learning_rate);
      c.mlp.momentum = num(p, "ml.mlp", "momentum", c.mlp.momentum);
      c.mlp.epochs = int(num(p, "ml.mlp", "epochs", c.mlp.epochs));
    }
    if (m.contains("svm")) {
      const json& s = m["svm"];
      expect_keys(s, "ml.svm", {"c", "gamma", "epsilon", "max_passes"});
      c.svm.c = num(s, "ml.svm", "c", c.svm.c);
      c.svm.gamma = num(s, "ml.svm", "gamma", c.svm.gamma);
      c.svm.epsilon = num(s, "ml.svm", "epsilon", c.svm.epsilon);
      c.svm.max_passes = int(num(s, "ml.svm", "max_passes", c.svm.max_passes));
    }
    if (m.contains("furia")) {
      const json& f = m["furia"];
      expect_keys(f, "ml.furia",
                  {"max_rules_per_class", "min_holdout_precision",
                   "max_support_candidates"});
      c.furia.max_rules_per_class = int(
          num(f, "ml.furia", "max_rules_per_class", c.furia.max_rules_per_class));
      c.furia.min_holdout_precision = num(f, "ml.furia", "min_holdout_precision",
                                          c.furia.min_holdout_precision);
      c.furia.max_support_candidates =
          int(num(f, "ml.furia", "max_support_candidates",
                  c.furia.max_support_candidates));
    }
  }

  if (doc.contains("featsel")) {
    const json& f = doc["featsel"];
    expect_keys(f, "featsel",
                {"predictors", "train_fraction", "resplit_per_level"});
    c.featsel_kinds = parse_kinds(
        text(f, "featsel", "predictors", kinds_text(c.featsel_kinds)),
        "featsel.predictors");
    c.featsel.train_fraction =
        num(f, "featsel", "train_fraction", c.featsel.train_fraction);
    c.featsel.resplit_per_level =
        flag(f, "featsel", "resplit_per_level", c.featsel.resplit_per_level);
  }

  if (doc.contains("som")) {
    const json& s = doc["som"];
    expect_keys(s, "som", {"width", "height", "epochs", "finetune"});
    c.som.width = int(num(s, "som", "width", c.som.width));
    c.som.height = int(num(s, "som", "height", c.som.height));
    c.som.epochs = int(num(s, "som", "epochs", c.som.epochs));
    c.som.finetune = int(num(s, "som", "finetune", c.som.finetune));
  }

  if (doc.contains("synth")) {
    const json& s = doc["synth"];
    expect_keys(s, "synth",
                {"participants", "duration_s", "window_seconds", "sound_above",
                 "illuminance_below", "corrupt_type1", "corrupt_type2",
                 "pulse_amp_lo", "pulse_amp_hi", "noise_scale"});
    c.synth.participants =
        int(num(s, "synth", "participants", c.synth.participants));
    c.synth.duration_s = num(s, "synth", "duration_s", c.synth.duration_s);
    c.synth.window_seconds =
        num(s, "synth", "window_seconds", c.synth.window_seconds);
    c.synth.sound_above = num(s, "synth", "sound_above", c.synth.sound_above);
    c.synth.illuminance_below =
        num(s, "synth", "illuminance_below", c.synth.illuminance_below);
    c.synth.corrupt_type1 =
        int(num(s, "synth", "corrupt_type1", c.synth.corrupt_type1));
    c.synth.corrupt_type2 =
        int(num(s, "synth", "corrupt_type2", c.synth.corrupt_type2));
    c.synth.pulse_amp_lo = num(s, "synth", "pulse_amp_lo", c.synth.pulse_amp_lo);
    c.synth.pulse_amp_hi = num(s, "synth", "pulse_amp_hi", c.synth.pulse_amp_hi);
    c.synth.noise_scale = num(s, "synth", "noise_scale", c.synth.noise_scale);
  }

  // Seeds follow the run seed unless a section pinned them explicitly; the
  // JSON shape keeps one seed knob for reproducibility.
  c.reptree.seed = c.seed;
  c.mlp.seed = c.seed;
  c.svm.seed = c.seed;
  c.furia.seed = c.seed;
  c.som.seed = c.seed;
  c.featsel.seed = c.seed;
  return c;
}

std::string config_json(const RunConfig& c) {
  json doc;
  doc["participants"] = json::array();
  for (const ParticipantEntry& p : c.participants)
    doc["participants"].push_back({{"id", p.id}, {"dir", p.dir}});
  doc["out_dir"] = c.out_dir;
  doc["seed"] = c.seed;
  doc["window_seconds"] = c.window_seconds;
  doc["ha_boundary"] = c.ha_boundary == HaBoundary::ge6 ? "ge6" : "gt6";
  doc["snap_tolerance_s"] = c.snap_tolerance_s;
  doc["walk_start"] = c.walk_start;
  doc["walk_end"] = c.walk_end;
  doc["eda"] = {
      {"theta", c.theta},
      {"threshold_mode",
       c.threshold_mode == ThresholdMode::clamp ? "clamp" : "zero_above"},
      {"qc_two_level", c.qc.two_level},
      {"qc_zero", c.qc.zero},
      {"qc_loss", c.qc.loss}};
  doc["arousal"] = {{"tau1_init", c.cda.tau1_init},
                    {"tau2_init", c.cda.tau2_init},
                    {"optim_restarts", c.cda.optim_restarts},
                    {"tonic_sigma_s", c.cda.tonic_sigma_s},
                    {"driver_sigma_s", c.cda.driver_sigma_s},
                    {"rmse_cap", c.cda.rmse_cap},
                    {"min_duration_s", c.cda.min_duration_s},
                    {"amp_threshold", c.scr.amp_threshold},
                    {"rise_min_s", c.scr.rise_min_s},
                    {"rise_max_s", c.scr.rise_max_s},
                    {"merge_eps", c.scr.merge_eps}};
  doc["isovist"] = {{"fov_deg", c.isovist.fov_deg},
                    {"radius_m", c.isovist.radius_m},
                    {"angular_step_deg", c.isovist.angular_step_deg},
                    {"obstacles", c.isovist.obstacles_path}};
  doc["geomap"] = {{"grid_meters", c.geomap.grid_meters},
                   {"divide_by_total", c.geomap.divide_by_total}};
  doc["ml"] = {
      {"target", c.target == Target::binary ? "binary" : "multiclass"},
      {"folds", c.folds},
      {"train", kinds_text(c.train_kinds)},
      {"reptree",
       {{"min_leaf", c.reptree.min_leaf},
        {"max_depth", c.reptree.max_depth},
        {"pruning", c.reptree.pruning},
        {"holdout_fraction", c.reptree.holdout_fraction}}},
      {"mlp",
       {{"hidden", c.mlp.hidden},
        {"learning_rate", c.mlp.learning_rate},
        {"momentum", c.mlp.momentum},
        {"epochs", c.mlp.epochs}}},
      {"svm",
       {{"c", c.svm.c},
        {"gamma", c.svm.gamma},
        {"epsilon", c.svm.epsilon},
        {"max_passes", c.svm.max_passes}}},
      {"furia",
       {{"max_rules_per_class", c.furia.max_rules_per_class},
        {"min_holdout_precision", c.furia.min_holdout_precision},
        {"max_support_candidates", c.furia.max_support_candidates}}}};
  doc["featsel"] = {{"predictors", kinds_text(c.featsel_kinds)},
                    {"train_fraction", c.featsel.train_fraction},
                    {"resplit_per_level", c.featsel.resplit_per_level}};
  doc["som"] = {{"width", c.som.width},
                {"height", c.som.height},
                {"epochs", c.som.epochs},
                {"finetune", c.som.finetune}};
  doc["synth"] = {{"participants", c.synth.participants},
                  {"duration_s", c.synth.duration_s},
                  {"window_seconds", c.synth.window_seconds},
                  {"sound_above", c.synth.sound_above},
                  {"illuminance_below", c.synth.illuminance_below},
                  {"corrupt_type1", c.synth.corrupt_type1},
                  {"corrupt_type2", c.synth.corrupt_type2},
                  {"pulse_amp_lo", c.synth.pulse_amp_lo},
                  {"pulse_amp_hi", c.synth.pulse_amp_hi},
                  {"noise_scale", c.synth.noise_scale}};
  return doc.dump(2) + "\n";
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("save_config: cannot open " + path);
  out << config_json(config);
  if (!out) throw IoFailure("save_config: write failed for " + path);
}

void validate_config(const RunConfig& c) {
  if (c.participants.empty())
    throw ConfigInvalid("config: no participants in the manifest");
  for (const ParticipantEntry& p : c.participants)
    for (int ch = 0; ch < kNumChannels; ++ch) {
      const std::string path =
          stream_path(p.dir, p.id, static_cast<Channel>(ch));
      if (!std::filesystem::exists(path))
        throw ConfigInvalid("config: missing stream file " + path);
    }
  if (!c.isovist.obstacles_path.empty() &&
      !std::filesystem::exists(c.isovist.obstacles_path))
    throw ConfigInvalid("config: missing obstacle file " +
                        c.isovist.obstacles_path);
  if (c.window_seconds <= 0.0)
    throw ConfigInvalid("config: window_seconds must be positive");
  if (c.folds < 2) throw ConfigInvalid("config: folds must be at least 2");
  if (c.theta < 0.0) throw ConfigInvalid("config: theta must be nonnegative");
  if (c.isovist.radius_m <= 0.0 || c.isovist.angular_step_deg <= 0.0 ||
      c.isovist.fov_deg <= 0.0 || c.isovist.fov_deg > 360.0)
    throw ConfigInvalid("config: bad isovist geometry");
  if (c.geomap.grid_meters <= 0.0)
    throw ConfigInvalid("config: grid_meters must be positive");
}

void validate_synth(const RunConfig& c) {
  if (c.synth.participants < 1)
    throw ConfigInvalid("config: synth.participants must be at least 1");
  if (c.synth.duration_s <= 0.0)
    throw ConfigInvalid("config: synth.duration_s must be positive");
  if (c.synth.window_seconds <= 0.0)
    throw ConfigInvalid("config: synth.window_seconds must be positive");
  if (c.synth.corrupt_type1 + c.synth.corrupt_type2 > c.synth.participants)
    throw ConfigInvalid("config: more corrupted participants than generated");
  if (c.synth.pulse_amp_lo > c.synth.pulse_amp_hi || c.synth.pulse_amp_lo < 0.0)
    throw ConfigInvalid("config: bad synth pulse amplitude range");
  if (c.synth.noise_scale < 0.0)
    throw ConfigInvalid("config: synth.noise_scale must be nonnegative");
}

}  // namespace walksense
