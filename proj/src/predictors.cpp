#include "walksense/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace walksense {

const char* predictor_name(PredictorKind k) {
  switch (k) {
    case PredictorKind::reptree: return "reptree";
    case PredictorKind::mlp: return "mlp";
    case PredictorKind::svm: return "svm";
  }
  return "reptree";
}

PredictorKind predictor_from_name(const std::string& name) {
  if (name == "reptree") return PredictorKind::reptree;
  if (name == "mlp") return PredictorKind::mlp;
  if (name == "svm") return PredictorKind::svm;
  throw Error("unknown predictor '" + name + "'");
}

int Table::distinct_labels() const {
  return static_cast<int>(std::set<int>(y.begin(), y.end()).size());
}

Table Table::select_rows(const std::vector<std::size_t>& idx) const {
  Table t;
  t.feature_names = feature_names;
  t.class_names = class_names;
  t.x.reserve(idx.size());
  t.y.reserve(idx.size());
  for (const std::size_t i : idx) {
    t.x.push_back(x[i]);
    t.y.push_back(y[i]);
  }
  return t;
}

Table Table::select_features(const std::vector<int>& features) const {
  Table t;
  t.class_names = class_names;
  t.y = y;
  for (const int f : features) t.feature_names.push_back(feature_names[f]);
  t.x.reserve(x.size());
  for (const auto& row : x) {
    std::vector<double> sub;
    sub.reserve(features.size());
    for (const int f : features) sub.push_back(row[f]);
    t.x.push_back(std::move(sub));
  }
  return t;
}

Table make_table(const CompiledDataset& data, Target target,
                 const std::vector<int>& feature_subset) {
  std::vector<int> feats = feature_subset;
  if (feats.empty()) {
    feats.resize(kNumFeatures);
    for (int f = 0; f < kNumFeatures; ++f) feats[f] = f;
  }
  Table t;
  for (const int f : feats) {
    if (f < 0 || f >= kNumFeatures) throw Error("make_table: bad feature index");
    t.feature_names.push_back(kFeatureNames[f]);
  }
  if (target == Target::binary)
    t.class_names = {label_name(BinaryLabel::N), label_name(BinaryLabel::A)};
  else
    t.class_names = {label_name(MulticlassLabel::N), label_name(MulticlassLabel::LA),
                     label_name(MulticlassLabel::HA)};
  t.x.reserve(data.rows.size());
  t.y.reserve(data.rows.size());
  for (const CompiledRow& row : data.rows) {
    std::vector<double> feat;
    feat.reserve(feats.size());
    for (const int f : feats) feat.push_back(row.features[f]);
    t.x.push_back(std::move(feat));
    t.y.push_back(target == Target::binary ? static_cast<int>(row.binary)
                                           : static_cast<int>(row.multiclass));
  }
  return t;
}

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec) {
  auto take = [&spec](const char* key, double fallback) {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
  };
  auto validate = [&spec](std::initializer_list<const char*> known) {
    for (const auto& [key, value] : spec.params) {
      (void)value;
      if (std::find_if(known.begin(), known.end(), [&](const char* k) {
            return key == k;
          }) == known.end())
        throw Error("unknown " + std::string(predictor_name(spec.kind)) +
                    " parameter '" + key + "'");
    }
  };
  switch (spec.kind) {
    case PredictorKind::reptree: {
      validate({"min_leaf", "max_depth", "pruning", "holdout_fraction"});
      RepTreeParams p;
      p.min_leaf = static_cast<int>(take("min_leaf", p.min_leaf));
      p.max_depth = static_cast<int>(take("max_depth", p.max_depth));
      p.pruning = take("pruning", p.pruning ? 1.0 : 0.0) != 0.0;
      p.holdout_fraction = take("holdout_fraction", p.holdout_fraction);
      p.seed = spec.seed;
      if (p.min_leaf < 1 || p.holdout_fraction <= 0.0 || p.holdout_fraction >= 1.0)
        throw Error("invalid reptree parameters");
      return std::make_unique<RepTreeModel>(p);
    }
    case PredictorKind::mlp: {
      validate({"hidden", "learning_rate", "momentum", "epochs"});
      MlpParams p;
      p.hidden = static_cast<int>(take("hidden", p.hidden));
      p.learning_rate = take("learning_rate", p.learning_rate);
      p.momentum = take("momentum", p.momentum);
      p.epochs = static_cast<int>(take("epochs", p.epochs));
      p.seed = spec.seed;
      if (p.hidden < 1 || p.learning_rate <= 0.0 || p.momentum < 0.0 || p.epochs < 0)
        throw Error("invalid mlp parameters");
      return std::make_unique<MlpModel>(p);
    }
    case PredictorKind::svm: {
      validate({"c", "gamma", "epsilon", "max_passes"});
      SvmParams p;
      p.c = take("c", p.c);
      p.gamma = take("gamma", p.gamma);
      p.epsilon = take("epsilon", p.epsilon);
      p.max_passes = static_cast<int>(take("max_passes", p.max_passes));
      p.seed = spec.seed;
      if (p.c <= 0.0 || p.gamma < 0.0 || p.epsilon <= 0.0 || p.max_passes < 1)
        throw Error("invalid svm parameters");
      return std::make_unique<SvmModel>(p);
    }
  }
  throw Error("unknown predictor kind");
}

Metrics confusion_metrics(const ConfusionCounts& c) {
  Metrics m;
  if (c.tp + c.fn > 0) {
    m.recall = double(c.tp) / double(c.tp + c.fn);
    m.sensitivity = m.recall;
  }
  if (c.tp + c.fp > 0) m.precision = double(c.tp) / double(c.tp + c.fp);
  if (c.tn + c.fp > 0) m.specificity = double(c.tn) / double(c.tn + c.fp);
  if (c.total() > 0) m.accuracy = double(c.tp + c.tn) / double(c.total());
  return m;
}

std::vector<int> stratified_folds(const std::vector<int>& y, int k,
                                  std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<int> fold(y.size(), 0);
  for (auto& [cls, idx] : by_class) {
    (void)cls;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j)
      fold[idx[j]] = static_cast<int>(j % k);
  }
  return fold;
}

CvResult cross_validate_with(const PredictorFactory& factory, const Table& data,
                             int k, std::uint64_t seed) {
  if (k < 2) throw Error("cross_validate: k must be at least 2");
  if (data.rows() < static_cast<std::size_t>(k))
    throw TooFewRows("cross_validate: " + std::to_string(data.rows()) +
                     " rows for " + std::to_string(k) + " folds");

  const std::vector<int> fold = stratified_folds(data.y, k, seed);
  CvResult result;
  result.predicted.assign(data.rows(), 0);
  result.scores.assign(data.rows(), std::vector<double>(data.num_classes(), 0.0));

  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.rows(); ++i)
      (fold[i] == f ? test_idx : train_idx).push_back(i);
    if (test_idx.empty()) continue;

    const Table train = data.select_rows(train_idx);
    const std::unique_ptr<Predictor> model = factory();
    model->train(train);
    for (const std::size_t i : test_idx) {
      result.predicted[i] = model->predict(data.x[i]);
      for (int c = 0; c < data.num_classes(); ++c)
        result.scores[i][c] = model->score(data.x[i], c);
    }
  }

  result.counts.assign(data.num_classes(), ConfusionCounts{});
  long correct = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const int truth = data.y[i];
    const int pred = result.predicted[i];
    if (truth == pred) ++correct;
    for (int c = 0; c < data.num_classes(); ++c) {
      ConfusionCounts& cc = result.counts[c];
      if (truth == c)
        (pred == c ? cc.tp : cc.fn)++;
      else
        (pred == c ? cc.fp : cc.tn)++;
    }
  }
  result.accuracy = data.rows() ? double(correct) / double(data.rows()) : 0.0;
  for (const ConfusionCounts& cc : result.counts)
    result.metrics.push_back(confusion_metrics(cc));
  return result;
}

CvResult cross_validate(const PredictorSpec& spec, const Table& data, int k) {
  return cross_validate_with([&spec] { return make_predictor(spec); }, data, k,
                             spec.seed);
}

std::vector<RocPoint> roc_points(const std::vector<int>& y,
                                 const std::vector<std::vector<double>>& scores,
                                 int positive_class) {
  long pos = 0, neg = 0;
  std::vector<std::pair<double, bool>> ranked;  // score, is_positive
  ranked.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool is_pos = y[i] == positive_class;
    (is_pos ? pos : neg)++;
    ranked.emplace_back(scores[i][positive_class], is_pos);
  }
  std::vector<RocPoint> points = {{0.0, 0.0}};
  if (pos == 0 || neg == 0) {
    points.push_back({1.0, 1.0});
    return points;
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  long tp = 0, fp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    (ranked[i].second ? tp : fp)++;
    // Emit one point per distinct threshold (ties move together).
    if (i + 1 < ranked.size() && ranked[i + 1].first == ranked[i].first) continue;
    points.push_back({double(fp) / neg, double(tp) / pos});
  }
  return points;
}

double roc_auc(const std::vector<RocPoint>& points) {
  double auc = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    auc += 0.5 * (points[i].tpr + points[i - 1].tpr) *
           (points[i].fpr - points[i - 1].fpr);
  return auc;
}

}  // namespace walksense
