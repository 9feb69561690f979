#include "walksense/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace walksense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGainEps = 1e-9;

bool holds(const Antecedent& a, const std::vector<double>& x) {
  const double v = x[a.feature];
  return a.op == RuleOp::le ? v <= a.threshold : v >= a.threshold;
}

// FOIL information gain for shrinking the covered set from (p0, n0) to (p, n).
double foil_gain(double p, double n, double p0, double n0) {
  if (p <= 0.0) return -kInf;
  return p * (std::log2(p / (p + n)) - std::log2(p0 / (p0 + n0)));
}

struct RuleStats {
  long coverage = 0;
  long correct = 0;
};

RuleStats count_on(const CrispRule& rule, const Table& t,
                   const std::vector<std::size_t>& idx) {
  RuleStats s;
  for (const std::size_t r : idx) {
    if (!rule.matches(t.x[r])) continue;
    ++s.coverage;
    if (t.y[r] == rule.consequent) ++s.correct;
  }
  return s;
}

double laplace_value(const RuleStats& s) {
  return (s.correct + 1.0) / (s.coverage + 2.0);
}

// Tighten or append a bound; at most one antecedent per (feature, op).
void apply_bound(CrispRule& rule, const Antecedent& a) {
  for (Antecedent& e : rule.antecedents) {
    if (e.feature != a.feature || e.op != a.op) continue;
    e.threshold = a.threshold;
    return;
  }
  rule.antecedents.push_back(a);
}

// Best single bound by FOIL gain over the covered grow rows, or nullopt when
// no bound improves the pos/neg mix.
std::optional<Antecedent> best_bound(const Table& t,
                                     const std::vector<std::size_t>& covered,
                                     int positive, double p0, double n0) {
  std::optional<Antecedent> best;
  double best_gain = kGainEps;
  std::vector<std::pair<double, bool>> vals;  // value, is_positive
  for (int f = 0; f < t.num_features(); ++f) {
    vals.clear();
    vals.reserve(covered.size());
    for (const std::size_t r : covered)
      vals.emplace_back(t.x[r][f], t.y[r] == positive);
    std::sort(vals.begin(), vals.end());

    double p = 0.0, n = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      (vals[i].second ? p : n) += 1.0;
      if (i + 1 < vals.size() && vals[i + 1].first == vals[i].first) continue;
      const double g = foil_gain(p, n, p0, n0);
      if (g > best_gain + 1e-12) {
        best_gain = g;
        best = Antecedent{f, RuleOp::le, vals[i].first};
      }
    }
    p = 0.0;
    n = 0.0;
    for (std::size_t i = vals.size(); i-- > 0;) {
      (vals[i].second ? p : n) += 1.0;
      if (i > 0 && vals[i - 1].first == vals[i].first) continue;
      const double g = foil_gain(p, n, p0, n0);
      if (g > best_gain + 1e-12) {
        best_gain = g;
        best = Antecedent{f, RuleOp::ge, vals[i].first};
      }
    }
  }
  return best;
}

// Greedy reduced-error pruning: drop the antecedent whose removal maximizes
// the Laplace value on the holdout, ties toward the later (least senior)
// bound, while at least one antecedent remains.
void prune_rule(CrispRule& rule, const Table& t,
                const std::vector<std::size_t>& holdout) {
  bool improved = true;
  while (improved && rule.antecedents.size() > 1) {
    improved = false;
    const double base = laplace_value(count_on(rule, t, holdout));
    double best_v = -kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < rule.antecedents.size(); ++i) {
      CrispRule trial = rule;
      trial.antecedents.erase(trial.antecedents.begin() + i);
      const double v = laplace_value(count_on(trial, t, holdout));
      if (v >= best_v) {
        best_v = v;
        best_i = i;
      }
    }
    if (best_v >= base) {
      rule.antecedents.erase(rule.antecedents.begin() + best_i);
      improved = true;
    }
  }
}

double membership_on_feature(const FuzzyRule& rule, int feature, double v) {
  double m = 1.0;
  bool any = false;
  for (const FuzzyAntecedent& a : rule.antecedents) {
    if (a.feature != feature) continue;
    any = true;
    m *= a.membership(v);
  }
  return any ? m : -1.0;  // -1 marks "no antecedent on this feature"
}

std::string trim_number(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

bool CrispRule::matches(const std::vector<double>& x) const {
  for (const Antecedent& a : antecedents)
    if (!holds(a, x)) return false;
  return true;
}

double FuzzyAntecedent::membership(double v) const {
  if (op == RuleOp::le) {
    if (v <= core) return 1.0;
    if (v >= support) return 0.0;
    return (support - v) / (support - core);
  }
  if (v >= core) return 1.0;
  if (v <= support) return 0.0;
  return (v - support) / (core - support);
}

double FuzzyRule::firing(const std::vector<double>& x) const {
  double m = certainty_factor;
  for (const FuzzyAntecedent& a : antecedents) {
    if (m <= 0.0) return 0.0;
    m *= a.membership(x[a.feature]);
  }
  return m;
}

std::vector<CrispRule> induce_crisp(const Table& train, FuriaParams params) {
  if (train.rows() == 0) throw EmptyTrain("induce_crisp: empty table");
  if (train.distinct_labels() < 2)
    throw SingleClass("induce_crisp: need at least two classes");

  std::vector<CrispRule> rules;
  std::vector<std::size_t> all(train.rows());
  std::iota(all.begin(), all.end(), 0);

  for (int c = 0; c < train.num_classes(); ++c) {
    std::mt19937_64 rng(params.seed ^ (0x9E3779B97F4A7C15ULL * (c + 1)));
    std::vector<std::size_t> working = all;

    for (int made = 0; made < params.max_rules_per_class; ++made) {
      long positives = 0;
      for (const std::size_t r : working) positives += train.y[r] == c;
      if (positives == 0) break;

      std::vector<std::size_t> shuffled = working;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const std::size_t n_prune = shuffled.size() / 3;
      std::vector<std::size_t> grow(shuffled.begin(),
                                    shuffled.end() - n_prune);
      std::vector<std::size_t> prune(shuffled.end() - n_prune,
                                     shuffled.end());

      double p0 = 0.0, n0 = 0.0;
      for (const std::size_t r : grow) (train.y[r] == c ? p0 : n0) += 1.0;
      if (p0 == 0.0) break;

      CrispRule rule;
      rule.consequent = c;
      std::vector<std::size_t> covered = grow;
      while (n0 > 0.0) {
        const auto bound = best_bound(train, covered, c, p0, n0);
        if (!bound) break;
        apply_bound(rule, *bound);
        std::vector<std::size_t> next;
        next.reserve(covered.size());
        for (const std::size_t r : covered)
          if (holds(*bound, train.x[r])) next.push_back(r);
        covered.swap(next);
        p0 = 0.0;
        n0 = 0.0;
        for (const std::size_t r : covered) (train.y[r] == c ? p0 : n0) += 1.0;
      }
      if (rule.antecedents.empty()) break;

      if (!prune.empty()) prune_rule(rule, train, prune);
      const RuleStats held = count_on(rule, train, prune.empty() ? grow : prune);
      const double precision =
          held.coverage > 0 ? double(held.correct) / double(held.coverage) : 0.0;
      if (precision < params.min_holdout_precision) break;

      const RuleStats full = count_on(rule, train, all);
      rule.coverage = full.coverage;
      rule.correct = full.correct;
      rules.push_back(rule);

      std::vector<std::size_t> remaining;
      remaining.reserve(working.size());
      for (const std::size_t r : working)
        if (!rule.matches(train.x[r])) remaining.push_back(r);
      if (remaining.size() == working.size()) break;
      working.swap(remaining);
    }
  }
  return rules;
}

FuzzyRule fuzzify(const CrispRule& rule, const Table& train,
                  FuriaParams params) {
  std::vector<std::size_t> all(train.rows());
  std::iota(all.begin(), all.end(), 0);
  if (count_on(rule, train, all).coverage == 0)
    throw NoCoverage("fuzzify: rule covers no training example");

  FuzzyRule out;
  out.consequent = rule.consequent;
  out.antecedents.reserve(rule.antecedents.size());
  for (const Antecedent& a : rule.antecedents)
    out.antecedents.push_back(
        FuzzyAntecedent{a.feature, a.op, a.threshold, a.threshold});

  // Greedy per-antecedent support extension: earlier antecedents keep their
  // fuzzified shape while later ones stay crisp.
  for (std::size_t i = 0; i < out.antecedents.size(); ++i) {
    FuzzyAntecedent& ant = out.antecedents[i];
    std::vector<double> w_other(train.rows(), 1.0);
    for (std::size_t r = 0; r < train.rows(); ++r)
      for (std::size_t j = 0; j < out.antecedents.size(); ++j) {
        if (j == i) continue;
        const FuzzyAntecedent& other = out.antecedents[j];
        w_other[r] *= other.membership(train.x[r][other.feature]);
      }

    std::set<double> beyond;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      if (w_other[r] <= 0.0) continue;
      const double v = train.x[r][ant.feature];
      if (ant.op == RuleOp::le ? v > ant.core : v < ant.core) beyond.insert(v);
    }
    std::vector<double> candidates(beyond.begin(), beyond.end());
    if (ant.op == RuleOp::ge) std::reverse(candidates.begin(), candidates.end());
    if (static_cast<int>(candidates.size()) > params.max_support_candidates) {
      std::vector<double> kept;
      kept.reserve(params.max_support_candidates);
      const double span = double(candidates.size() - 1);
      for (int k = 0; k < params.max_support_candidates; ++k)
        kept.push_back(candidates[static_cast<std::size_t>(
            std::llround(k * span / (params.max_support_candidates - 1)))]);
      kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
      candidates.swap(kept);
    }

    const auto purity_with = [&](double support) {
      FuzzyAntecedent trial = ant;
      trial.support = support;
      double num = 1.0, den = 2.0;
      for (std::size_t r = 0; r < train.rows(); ++r) {
        if (w_other[r] <= 0.0) continue;
        const double m = w_other[r] * trial.membership(train.x[r][ant.feature]);
        den += m;
        if (train.y[r] == rule.consequent) num += m;
      }
      return num / den;
    };

    double best_purity = purity_with(ant.core);
    double best_support = ant.core;
    for (const double cand : candidates) {
      const double purity = purity_with(cand);
      if (purity >= best_purity) {  // ties prefer the wider trapezoid
        best_purity = purity;
        best_support = cand;
      }
    }
    ant.support = best_support;
  }

  double num = 1.0, den = 2.0;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    double m = 1.0;
    for (const FuzzyAntecedent& a : out.antecedents)
      m *= a.membership(train.x[r][a.feature]);
    den += m;
    if (train.y[r] == rule.consequent) num += m;
  }
  out.certainty_factor = num / den;
  return out;
}

std::pair<int, double> classify_fuzzy(const std::vector<FuzzyRule>& rules,
                                      const std::vector<double>& x,
                                      int majority_class) {
  int num_classes = majority_class + 1;
  for (const FuzzyRule& r : rules)
    num_classes = std::max(num_classes, r.consequent + 1);
  std::vector<double> best(num_classes, 0.0);
  for (const FuzzyRule& r : rules)
    best[r.consequent] = std::max(best[r.consequent], r.firing(x));
  const auto it = std::max_element(best.begin(), best.end());
  if (*it <= 0.0) return {majority_class, 0.0};
  return {static_cast<int>(it - best.begin()), *it};
}

std::vector<FeatureRanges> rule_ranges(const std::vector<FuzzyRule>& rules,
                                       const Table& train) {
  if (train.rows() == 0) throw EmptyTrain("rule_ranges: empty table");
  std::vector<FeatureRanges> report;
  report.reserve(train.feature_names.size());

  for (int f = 0; f < train.num_features(); ++f) {
    double lo = kInf, hi = -kInf;
    for (const auto& row : train.x) {
      lo = std::min(lo, row[f]);
      hi = std::max(hi, row[f]);
    }

    std::set<double> cuts = {lo, hi};
    bool any_rule = false;
    for (const FuzzyRule& r : rules)
      for (const FuzzyAntecedent& a : r.antecedents) {
        if (a.feature != f) continue;
        any_rule = true;
        if (a.core > lo && a.core < hi) cuts.insert(a.core);
        if (a.support > lo && a.support < hi) cuts.insert(a.support);
      }

    FeatureRanges fr;
    fr.feature = f;
    fr.name = train.feature_names[f];

    const auto tag_at = [&](double v) -> std::string {
      std::set<int> core;
      bool support = false;
      for (const FuzzyRule& r : rules) {
        const double m = membership_on_feature(r, f, v);
        if (m < 0.0) continue;  // rule silent on this feature
        if (m >= 1.0 - 1e-12)
          core.insert(r.consequent);
        else if (m > 1e-12)
          support = true;
      }
      if (core.size() == 1) return train.class_names[*core.begin()];
      if (!core.empty() || support) return "fuzzy";
      return "inconclusive";
    };

    if (!any_rule || hi <= lo) {
      fr.segments.push_back({lo, hi, any_rule ? tag_at(lo) : "inconclusive"});
      report.push_back(std::move(fr));
      continue;
    }

    const std::vector<double> edges(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const std::string tag = tag_at(0.5 * (edges[k] + edges[k + 1]));
      if (!fr.segments.empty() && fr.segments.back().tag == tag)
        fr.segments.back().hi = edges[k + 1];
      else
        fr.segments.push_back({edges[k], edges[k + 1], tag});
    }
    report.push_back(std::move(fr));
  }
  return report;
}

std::string format_rules(const std::vector<FuzzyRule>& rules,
                         const Table& train) {
  std::ostringstream os;
  for (const FuzzyRule& r : rules) {
    bool first = true;
    for (const FuzzyAntecedent& a : r.antecedents) {
      if (!first) os << " AND ";
      first = false;
      os << train.feature_names[a.feature]
         << (a.op == RuleOp::le ? " <= " : " >= ") << trim_number(a.core);
      if (a.support != a.core) os << " ~ " << trim_number(a.support);
    }
    if (first) os << "(always)";
    os << " => " << train.class_names[r.consequent]
       << " (cf=" << trim_number(r.certainty_factor) << ")\n";
  }
  return os.str();
}

std::string format_ranges(const std::vector<FeatureRanges>& ranges) {
  std::ostringstream os;
  os << "feature,lo,hi,tag\n";
  for (const FeatureRanges& fr : ranges)
    for (const RangeSegment& s : fr.segments)
      os << fr.name << ',' << trim_number(s.lo) << ',' << trim_number(s.hi)
         << ',' << s.tag << '\n';
  return os.str();
}

void FuriaClassifier::train(const Table& data) {
  const std::vector<CrispRule> crisp = induce_crisp(data, params_);
  rules_.clear();
  for (const CrispRule& r : crisp) rules_.push_back(fuzzify(r, data, params_));
  num_classes_ = data.num_classes();
  std::vector<long> counts(num_classes_, 0);
  for (const int y : data.y) ++counts[y];
  majority_ = static_cast<int>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  trained_ = true;
}

int FuriaClassifier::predict(const std::vector<double>& features) const {
  if (!trained_) throw UntrainedModel("furia: predict before train");
  return classify_fuzzy(rules_, features, majority_).first;
}

double FuriaClassifier::score(const std::vector<double>& features,
                              int cls) const {
  if (!trained_) throw UntrainedModel("furia: score before train");
  std::vector<double> best(num_classes_, 0.0);
  for (const FuzzyRule& r : rules_)
    best[r.consequent] = std::max(best[r.consequent], r.firing(features));
  double sum = 0.0;
  for (const double b : best) sum += b;
  if (sum <= 0.0) return cls == majority_ ? 1.0 : 0.0;
  return best[cls] / sum;
}

}  // namespace walksense
