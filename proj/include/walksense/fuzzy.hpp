#pragma once
// Fuzzy unordered rule induction: greedy crisp rule learning with holdout
// pruning, trapezoidal fuzzification of the learned thresholds, certainty-
// weighted classification, and a per-feature range report.

#include <cstdint>
#include <string>
#include <vector>

#include "walksense/predictors.hpp"
#include "walksense/types.hpp"

namespace walksense {

struct NoCoverage : Error {
  using Error::Error;
};

enum class RuleOp { le, ge };

struct Antecedent {
  int feature = 0;
  RuleOp op = RuleOp::le;
  double threshold = 0.0;
};

struct CrispRule {
  std::vector<Antecedent> antecedents;  // at most one le and one ge per feature
  int consequent = 0;
  long coverage = 0;  // training rows matched
  long correct = 0;   // of those, rows of the consequent class

  bool matches(const std::vector<double>& x) const;
};

// One-sided trapezoids keep the crisp threshold as the core edge and ramp to
// zero at the extended support edge; the untouched side is open (infinite).
struct FuzzyAntecedent {
  int feature = 0;
  RuleOp op = RuleOp::le;
  double core = 0.0;     // crisp threshold, membership 1 inside it
  double support = 0.0;  // membership 0 beyond it; == core when degenerate

  double membership(double v) const;
};

struct FuzzyRule {
  std::vector<FuzzyAntecedent> antecedents;
  int consequent = 0;
  double certainty_factor = 0.0;  // Laplace-corrected fuzzy precision, in [0,1]

  double firing(const std::vector<double>& x) const;  // product x certainty
};

struct FuriaParams {
  std::uint64_t seed = 1;
  int max_rules_per_class = 64;       // safety cap on separate-and-conquer
  double min_holdout_precision = 0.5; // stop growing a class below this
  int max_support_candidates = 64;    // fuzzification search budget per side
};

// Separate-and-conquer per class: grow by information gain over the covered
// examples, prune antecedents against a seeded one-third holdout maximizing
// (correct+1)/(coverage+2), drop covered rows, stop when holdout precision
// falls below the floor. coverage/correct are re-counted on the full table.
std::vector<CrispRule> induce_crisp(const Table& train, FuriaParams params = {});

// Core edges stay at the crisp thresholds; each support edge extends outward
// to the covered-value candidate maximizing Laplace-corrected fuzzy
// precision, ties broken toward the wider (fuzzier) trapezoid.
FuzzyRule fuzzify(const CrispRule& rule, const Table& train,
                  FuriaParams params = {});

// label = argmax over classes of the best rule firing degree; rows firing no
// rule fall back to the training-majority class with score 0.
std::pair<int, double> classify_fuzzy(const std::vector<FuzzyRule>& rules,
                                      const std::vector<double>& x,
                                      int majority_class);

struct RangeSegment {
  double lo = 0.0;
  double hi = 0.0;
  std::string tag;  // a class name, "fuzzy", or "inconclusive"
};

struct FeatureRanges {
  int feature = 0;
  std::string name;
  std::vector<RangeSegment> segments;  // partition of the observed min-max
};

// Projection of the rule set onto each feature axis over the observed value
// range: single-class core coverage keeps the class name, support-only or
// contested-core stretches read "fuzzy", uncovered stretches "inconclusive".
std::vector<FeatureRanges> rule_ranges(const std::vector<FuzzyRule>& rules,
                                       const Table& train);

// Rule lines plus the range report as delimited text.
std::string format_rules(const std::vector<FuzzyRule>& rules,
                         const Table& train);
std::string format_ranges(const std::vector<FeatureRanges>& ranges);

class FuriaClassifier : public Predictor {
 public:
  explicit FuriaClassifier(FuriaParams params = {}) : params_(params) {}
  void train(const Table& data) override;
  int predict(const std::vector<double>& features) const override;
  double score(const std::vector<double>& features, int cls) const override;
  bool trained() const override { return trained_; }

  const std::vector<FuzzyRule>& rules() const { return rules_; }
  int majority_class() const { return majority_; }

 private:
  FuriaParams params_;
  std::vector<FuzzyRule> rules_;
  int majority_ = 0;
  int num_classes_ = 0;
  bool trained_ = false;
};

}  // namespace walksense
