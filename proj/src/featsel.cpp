#include "walksense/featsel.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace walksense {

namespace {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

Split split_rows(std::size_t n, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * n));
  Split s;
  s.train.assign(order.begin(), order.begin() + cut);
  s.test.assign(order.begin() + cut, order.end());
  return s;
}

std::vector<std::string> subset_names(const std::vector<int>& subset) {
  std::vector<std::string> names;
  names.reserve(subset.size());
  for (const int f : subset) names.push_back(kFeatureNames[f]);
  std::sort(names.begin(), names.end());
  return names;
}

std::string join_names(const std::vector<int>& subset) {
  std::string out;
  for (const std::string& n : subset_names(subset)) {
    if (!out.empty()) out += '+';
    out += n;
  }
  return out;
}

double holdout_accuracy(const PredictorSpec& spec, const Table& full,
                        const Split& split, const std::vector<int>& subset) {
  const Table view = full.select_features(subset);
  const Table train = view.select_rows(split.train);
  std::unique_ptr<Predictor> model;
  try {
    model = make_predictor(spec);
    model->train(train);
  } catch (const Error& e) {
    throw PredictorFailure(std::string(predictor_name(spec.kind)) + " on {" +
                           join_names(subset) + "}: " + e.what());
  }
  long correct = 0;
  for (const std::size_t r : split.test)
    if (model->predict(view.x[r]) == view.y[r]) ++correct;
  return split.test.empty() ? 0.0 : double(correct) / double(split.test.size());
}

}  // namespace

FeatselHierarchy backward_eliminate(const CompiledDataset& data,
                                    const std::vector<PredictorSpec>& specs,
                                    FeatselOptions opts) {
  const Table full = make_table(data, opts.target);
  const int n_features = full.num_features();
  if (n_features < 2)
    throw TooFewFeatures("backward_eliminate: need at least two features");
  if (full.rows() < 5)
    throw TooFewRows("backward_eliminate: need at least five rows");

  const Split base_split = split_rows(full.rows(), opts.train_fraction, opts.seed);

  FeatselHierarchy out;
  for (const PredictorSpec& spec : specs) {
    PredictorLadder ladder;
    ladder.kind = spec.kind;

    std::vector<int> current(n_features);
    std::iota(current.begin(), current.end(), 0);
    Split split = base_split;
    ladder.steps.push_back(
        {current, holdout_accuracy(spec, full, split, current), -1});

    int level = 0;
    while (current.size() > 1) {
      ++level;
      if (opts.resplit_per_level)
        split = split_rows(full.rows(), opts.train_fraction, opts.seed + level);

      double best_acc = -1.0;
      std::vector<int> best_subset;
      std::vector<std::string> best_names;
      int best_removed = -1;
      for (const int drop : current) {
        std::vector<int> candidate;
        candidate.reserve(current.size() - 1);
        for (const int f : current)
          if (f != drop) candidate.push_back(f);
        const double acc = holdout_accuracy(spec, full, split, candidate);
        std::vector<std::string> names = subset_names(candidate);
        if (acc > best_acc ||
            (acc == best_acc && names < best_names)) {
          best_acc = acc;
          best_subset = candidate;
          best_names = std::move(names);
          best_removed = drop;
        }
      }
      current = best_subset;
      ladder.steps.push_back({current, best_acc, best_removed});
    }
    out.ladders.push_back(std::move(ladder));
  }

  if (!out.ladders.empty()) {
    for (int size = n_features; size >= 1; --size) {
      AgreementRow row;
      row.size = size;
      row.exact = true;
      bool first = true;
      for (const PredictorLadder& ladder : out.ladders) {
        const LadderStep& step = ladder.steps[n_features - size];
        if (first) {
          row.common = step.subset;
          first = false;
          continue;
        }
        if (step.subset != out.ladders.front().steps[n_features - size].subset)
          row.exact = false;
        std::vector<int> merged;
        std::set_intersection(row.common.begin(), row.common.end(),
                              step.subset.begin(), step.subset.end(),
                              std::back_inserter(merged));
        row.common = std::move(merged);
      }
      out.agreement.push_back(std::move(row));
    }

    for (std::size_t i = 0; i < out.ladders.size(); ++i)
      for (const LadderStep& step : out.ladders[i].steps) {
        bool shared = false;
        for (std::size_t j = 0; j < out.ladders.size() && !shared; ++j) {
          if (j == i) continue;
          const LadderStep& other =
              out.ladders[j].steps[n_features - int(step.subset.size())];
          shared = other.subset == step.subset;
        }
        if (!shared)
          out.exclusive.emplace_back(out.ladders[i].kind,
                                     int(step.subset.size()));
      }
  }
  return out;
}

std::string format_hierarchy(const FeatselHierarchy& h) {
  std::ostringstream os;
  os << "predictor,size,subset,accuracy\n";
  for (const PredictorLadder& ladder : h.ladders)
    for (const LadderStep& step : ladder.steps)
      os << predictor_name(ladder.kind) << ',' << step.subset.size() << ','
         << join_names(step.subset) << ',' << step.accuracy << '\n';
  os << "agreement,size,subset,exact\n";
  for (const AgreementRow& row : h.agreement)
    os << "agreement," << row.size << ',' << join_names(row.common) << ','
       << (row.exact ? 1 : 0) << '\n';
  for (const auto& [kind, size] : h.exclusive)
    os << "exclusive," << size << ',' << predictor_name(kind) << ",\n";
  return os.str();
}

}  // namespace walksense
