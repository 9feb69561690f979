#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "support/synthdata.hpp"
#include "walksense/predictors.hpp"

using namespace walksense;
using testsupport::flip_labels;
using testsupport::planted_rule_compiled;
using testsupport::planted_rule_table;

TEST_CASE("tables map compiled rows onto stable class ids") {
  const CompiledDataset d = planted_rule_compiled(30, 5);
  const Table bin = make_table(d, Target::binary);
  REQUIRE(bin.class_names == std::vector<std::string>{"N", "A"});
  REQUIRE(bin.rows() == 30);
  REQUIRE(bin.num_features() == 9);
  const Table multi = make_table(d, Target::multiclass);
  REQUIRE(multi.class_names == std::vector<std::string>{"N", "LA", "HA"});
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(bin.y[i] == (d.rows[i].binary == BinaryLabel::A ? 1 : 0));
    CHECK(bin.x[i][0] == d.rows[i].features[0]);
  }
  const Table sub = make_table(d, Target::binary, {0, 4});
  CHECK(sub.num_features() == 2);
  CHECK(sub.feature_names[1] == "illuminance_lux");
  CHECK(sub.x[0][1] == d.rows[0].features[4]);
}

TEST_CASE("the tree recovers a planted single-feature cut") {
  Table t;
  t.feature_names = {"f0", "f1"};
  t.class_names = {"N", "A"};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double a = u(rng), b = u(rng);
    t.x.push_back({a, b});
    t.y.push_back(a > 0.6 ? 1 : 0);
  }
  RepTreeModel tree;
  tree.train(t);
  REQUIRE_FALSE(tree.root_is_leaf());
  CHECK(tree.root_feature() == 0);
  CHECK(tree.root_threshold() == doctest::Approx(0.6).epsilon(0.05));
  int correct = 0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (tree.predict(t.x[i]) == t.y[i]) ++correct;
  CHECK(double(correct) / double(t.rows()) > 0.98);
}

TEST_CASE("adjacent-double feature values cannot hang the tree") {
  Table t;
  t.feature_names = {"f0"};
  t.class_names = {"N", "A"};
  const double a = 1.0;
  const double b = std::nextafter(1.0, 2.0);
  for (int i = 0; i < 40; ++i) {
    t.x.push_back({i % 2 ? b : a});
    t.y.push_back(i % 2);
  }
  RepTreeParams params;
  params.pruning = false;
  RepTreeModel tree(params);
  tree.train(t);  // must terminate
  CHECK(tree.trained());
  CHECK(tree.predict({a}) == 0);
  CHECK(tree.predict({b}) == 1);
}

TEST_CASE("reduced-error pruning never hurts holdout error") {
  Table t = planted_rule_table(600, 9);
  flip_labels(t, 0.15, 3);
  RepTreeModel tree;
  tree.train(t);
  CHECK(tree.holdout_error_after_pruning() <=
        tree.holdout_error_before_pruning() + 1e-12);
}

TEST_CASE("predictors refuse degenerate training sets") {
  Table t;
  t.feature_names = {"f0"};
  t.class_names = {"N", "A"};
  CHECK_THROWS_AS(RepTreeModel().train(t), EmptyTrain);
  for (int i = 0; i < 10; ++i) {
    t.x.push_back({double(i)});
    t.y.push_back(0);
  }
  CHECK_THROWS_AS(RepTreeModel().train(t), SingleClass);
  CHECK_THROWS_AS(MlpModel().train(t), SingleClass);
  CHECK_THROWS_AS(SvmModel().train(t), SingleClass);
  CHECK_THROWS_AS(RepTreeModel().predict({1.0}), UntrainedModel);
}

TEST_CASE("the perceptron separates the planted rule") {
  Table t = planted_rule_table(500, 21);
  MlpParams params;
  params.epochs = 800;
  MlpModel mlp(params);
  mlp.train(t);
  int correct = 0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (mlp.predict(t.x[i]) == t.y[i]) ++correct;
  CHECK(double(correct) / double(t.rows()) > 0.9);
  const auto& trace = mlp.loss_trace();
  REQUIRE(trace.size() > 10);
  CHECK(trace.back() < trace.front());
  double s = 0.0;
  for (int c = 0; c < 2; ++c) s += mlp.score(t.x[0], c);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("the svm separates a wide-margin pair of blobs") {
  Table t;
  t.feature_names = {"f0", "f1"};
  t.class_names = {"N", "A"};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int i = 0; i < 200; ++i) {
    const bool pos = i % 2 == 1;
    t.x.push_back({(pos ? 3.0 : -3.0) + g(rng), g(rng)});
    t.y.push_back(pos ? 1 : 0);
  }
  SvmModel svm;
  svm.train(t);
  int correct = 0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (svm.predict(t.x[i]) == t.y[i]) ++correct;
  CHECK(correct == 200);
  REQUIRE(svm.dual_trace().size() >= 1);
}

TEST_CASE("stratified folds balance every class") {
  std::vector<int> y;
  for (int i = 0; i < 97; ++i) y.push_back(i % 3 == 0 ? 1 : 0);
  const std::vector<int> folds = stratified_folds(y, 10, 42);
  REQUIRE(folds.size() == y.size());
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<int> per(10, 0);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) per[folds[i]]++;
    const auto [lo, hi] = std::minmax_element(per.begin(), per.end());
    CHECK(*hi - *lo <= 1);
  }
  CHECK(stratified_folds(y, 10, 42) == folds);  // deterministic per seed
  CHECK(stratified_folds(y, 10, 43) != folds);
}

TEST_CASE("cross-validation pools out-of-fold confusion counts") {
  const Table t = planted_rule_table(400, 33);
  PredictorSpec spec;
  spec.kind = PredictorKind::reptree;
  const CvResult cv = cross_validate(spec, t, 10);
  REQUIRE(cv.counts.size() == 2);
  REQUIRE(cv.predicted.size() == t.rows());
  REQUIRE(cv.scores.size() == t.rows());
  for (int cls = 0; cls < 2; ++cls)
    CHECK(cv.counts[cls].total() == long(t.rows()));
  long correct = 0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (cv.predicted[i] == t.y[i]) ++correct;
  CHECK(cv.accuracy == doctest::Approx(double(correct) / double(t.rows())));
  CHECK(cv.accuracy > 0.9);
  // one-vs-rest counts agree between the two binary classes
  CHECK(cv.counts[0].tp == cv.counts[1].tn);
  CHECK(cv.counts[0].fp == cv.counts[1].fn);

  const CvResult again = cross_validate(spec, t, 10);
  CHECK(again.accuracy == cv.accuracy);
  CHECK(again.predicted == cv.predicted);
}

TEST_CASE("confusion metrics are exact quotients with absent zero cases") {
  ConfusionCounts c;
  c.tp = 3105;
  c.fp = 405;
  c.tn = 2162;
  c.fn = 396;
  const Metrics m = confusion_metrics(c);
  REQUIRE(m.recall);
  CHECK(*m.recall == doctest::Approx(3105.0 / 3501.0).epsilon(1e-12));
  CHECK(*m.precision == doctest::Approx(3105.0 / 3510.0).epsilon(1e-12));
  CHECK(*m.sensitivity == *m.recall);
  CHECK(*m.specificity == doctest::Approx(2162.0 / 2567.0).epsilon(1e-12));
  CHECK(*m.accuracy == doctest::Approx(5267.0 / 6068.0).epsilon(1e-12));

  ConfusionCounts zero;
  zero.tn = 10;
  const Metrics mz = confusion_metrics(zero);
  CHECK_FALSE(mz.recall);
  CHECK_FALSE(mz.precision);
  CHECK(mz.specificity);
  CHECK(*mz.specificity == 1.0);
}

TEST_CASE("roc sweep is monotone from origin to the far corner") {
  const Table t = planted_rule_table(300, 55);
  PredictorSpec spec;
  spec.kind = PredictorKind::reptree;
  const CvResult cv = cross_validate(spec, t, 10);
  const std::vector<RocPoint> roc = roc_points(t.y, cv.scores, 1);
  REQUIRE(roc.size() >= 2);
  CHECK(roc.front().fpr == 0.0);
  CHECK(roc.front().tpr == 0.0);
  CHECK(roc.back().fpr == 1.0);
  CHECK(roc.back().tpr == 1.0);
  for (std::size_t i = 0; i + 1 < roc.size(); ++i) {
    CHECK(roc[i + 1].fpr >= roc[i].fpr);
    CHECK(roc[i + 1].tpr >= roc[i].tpr);
  }
  const double auc = roc_auc(roc);
  CHECK(auc > 0.9);
  CHECK(auc <= 1.0);

  // perfect scores give a unit square corner
  std::vector<int> y = {0, 0, 1, 1};
  std::vector<std::vector<double>> scores = {
      {0.9, 0.1}, {0.8, 0.2}, {0.1, 0.9}, {0.2, 0.8}};
  CHECK(roc_auc(roc_points(y, scores, 1)) == doctest::Approx(1.0));
}

TEST_CASE("the factory protocol matches the kind-based protocol") {
  const Table t = planted_rule_table(200, 77);
  PredictorSpec spec;
  spec.kind = PredictorKind::reptree;
  spec.seed = 5;
  const CvResult a = cross_validate(spec, t, 5);
  const CvResult b = cross_validate_with(
      [&] { return make_predictor(spec); }, t, 5, spec.seed);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.predicted == b.predicted);
}

TEST_CASE("predictor names round-trip") {
  for (const PredictorKind k :
       {PredictorKind::reptree, PredictorKind::mlp, PredictorKind::svm})
    CHECK(predictor_from_name(predictor_name(k)) == k);
  CHECK_THROWS_AS(predictor_from_name("forest"), Error);
}
