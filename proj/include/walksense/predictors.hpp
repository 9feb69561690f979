#pragma once
// Supervised models behind one predictor interface (decision tree with
// reduced-error pruning, one-hidden-layer perceptron, RBF-kernel SVM),
// stratified k-fold cross-validation and confusion metrics.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "walksense/types.hpp"

namespace walksense {

struct SingleClass : Error {
  using Error::Error;
};
struct EmptyTrain : Error {
  using Error::Error;
};
struct UntrainedModel : Error {
  using Error::Error;
};
struct TooFewRows : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};

enum class PredictorKind { reptree, mlp, svm };
enum class Target { binary, multiclass };

const char* predictor_name(PredictorKind k);
PredictorKind predictor_from_name(const std::string& name);

struct PredictorSpec {
  PredictorKind kind = PredictorKind::reptree;
  std::map<std::string, double> params;  // overrides of per-kind defaults
  std::uint64_t seed = 1;
};

// Flat numeric training view; class ids are fixed per target (binary: N=0,
// A=1; multiclass: N=0, LA=1, HA=2) so confusion rows keep a stable order
// even when a class is absent.
struct Table {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> x;  // [row][feature]
  std::vector<int> y;                  // [row]

  std::size_t rows() const { return x.size(); }
  int num_features() const { return static_cast<int>(feature_names.size()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  int distinct_labels() const;
  Table select_rows(const std::vector<std::size_t>& idx) const;
  Table select_features(const std::vector<int>& features) const;
};

// feature_subset empty means all nine features, otherwise indices into
// kFeatureNames.
Table make_table(const CompiledDataset& data, Target target,
                 const std::vector<int>& feature_subset = {});

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual void train(const Table& data) = 0;
  virtual int predict(const std::vector<double>& features) const = 0;
  // P(class) estimate in [0,1]; scores over classes sum to <= 1 + 1e-9.
  virtual double score(const std::vector<double>& features, int cls) const = 0;
  virtual bool trained() const = 0;
};

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec);

// ---------------------------------------------------------------- REP tree

struct RepTreeParams {
  int min_leaf = 2;
  int max_depth = 0;  // 0 = unlimited
  bool pruning = true;
  double holdout_fraction = 0.25;  // internal reduced-error-pruning split
  std::uint64_t seed = 1;
};

class RepTreeModel : public Predictor {
 public:
  explicit RepTreeModel(RepTreeParams params = {}) : params_(params) {}
  void train(const Table& data) override;
  int predict(const std::vector<double>& features) const override;
  double score(const std::vector<double>& features, int cls) const override;
  bool trained() const override { return !nodes_.empty(); }

  bool root_is_leaf() const;
  int root_feature() const;
  double root_threshold() const;
  double holdout_error_before_pruning() const { return holdout_error_before_; }
  double holdout_error_after_pruning() const { return holdout_error_after_; }

 private:
  struct Node {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int majority = 0;
    std::vector<double> freqs;  // Laplace-smoothed class frequencies
  };
  int leaf_for(const std::vector<double>& features) const;

  RepTreeParams params_;
  std::vector<Node> nodes_;  // nodes_[0] is the root
  double holdout_error_before_ = 0.0;
  double holdout_error_after_ = 0.0;
};

// --------------------------------------------------------------------- MLP

struct MlpParams {
  int hidden = 10;
  double learning_rate = 0.3;
  double momentum = 0.2;
  int epochs = 1000;
  std::uint64_t seed = 1;
};

class MlpModel : public Predictor {
 public:
  explicit MlpModel(MlpParams params = {}) : params_(params) {}
  void train(const Table& data) override;
  int predict(const std::vector<double>& features) const override;
  double score(const std::vector<double>& features, int cls) const override;
  bool trained() const override { return !w1_.empty(); }

  const std::vector<double>& loss_trace() const { return loss_trace_; }

 private:
  std::vector<double> forward(const std::vector<double>& features) const;

  MlpParams params_;
  int in_ = 0, out_ = 0;
  std::vector<double> mean_, sd_;       // internal z-score standardization
  std::vector<double> w1_, b1_;         // hidden x in, hidden
  std::vector<double> w2_, b2_;         // out x hidden, out
  std::vector<double> loss_trace_;      // mean cross-entropy per epoch
};

// --------------------------------------------------------------------- SVM

struct SvmParams {
  double c = 1.0;
  double gamma = 0.0;     // 0 = 1/num_features
  double epsilon = 0.001;  // KKT tolerance
  int max_passes = 10000;  // cap on SMO sweeps
  std::uint64_t seed = 1;
};

class SvmModel : public Predictor {
 public:
  explicit SvmModel(SvmParams params = {}) : params_(params) {}
  void train(const Table& data) override;
  int predict(const std::vector<double>& features) const override;
  double score(const std::vector<double>& features, int cls) const override;
  bool trained() const override { return !machines_.empty(); }

  // Dual objective after each SMO sweep of the first one-vs-rest machine.
  const std::vector<double>& dual_trace() const { return dual_trace_; }

 private:
  struct Machine {
    std::vector<std::vector<double>> sv;
    std::vector<double> alpha_y;
    double b = 0.0;
  };
  double decision(const Machine& m, const std::vector<double>& features) const;

  SvmParams params_;
  double gamma_ = 0.0;
  int num_classes_ = 0;
  std::vector<Machine> machines_;  // one-vs-rest, one per class
  std::vector<double> dual_trace_;
};

// ------------------------------------------------------- evaluation pieces

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

// Zero denominators yield absent values rather than a throw.
struct Metrics {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> sensitivity;  // == recall by definition
  std::optional<double> specificity;
  std::optional<double> accuracy;
};

Metrics confusion_metrics(const ConfusionCounts& c);

struct CvResult {
  std::vector<ConfusionCounts> counts;       // one-vs-rest, per class id
  std::vector<Metrics> metrics;              // per class id
  double accuracy = 0.0;                     // pooled out-of-fold
  std::vector<int> predicted;                // per row
  std::vector<std::vector<double>> scores;   // [row][class]
};

// Stratified seeded folds: per-class round-robin deal after a seeded
// shuffle, so fold class proportions differ by at most one row.
std::vector<int> stratified_folds(const std::vector<int>& y, int k,
                                  std::uint64_t seed);

CvResult cross_validate(const PredictorSpec& spec, const Table& data, int k = 10);

// Same protocol with a caller-supplied model factory (one fresh model per
// fold), for predictors living outside PredictorKind.
using PredictorFactory = std::function<std::unique_ptr<Predictor>()>;
CvResult cross_validate_with(const PredictorFactory& factory, const Table& data,
                             int k = 10, std::uint64_t seed = 1);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Threshold sweep over the positive-class scores, (0,0) to (1,1).
std::vector<RocPoint> roc_points(const std::vector<int>& y,
                                 const std::vector<std::vector<double>>& scores,
                                 int positive_class);

double roc_auc(const std::vector<RocPoint>& points);

}  // namespace walksense
