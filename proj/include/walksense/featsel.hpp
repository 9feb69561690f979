#pragma once
// Backward feature elimination wrapper: seeded 60/40 holdout evaluation of
// every single-feature removal per level, one ladder per predictor, plus the
// cross-predictor agreement report.

#include <cstdint>
#include <string>
#include <vector>

#include "walksense/predictors.hpp"
#include "walksense/types.hpp"

namespace walksense {

struct TooFewFeatures : Error {
  using Error::Error;
};
struct PredictorFailure : Error {
  using Error::Error;
};

struct FeatselOptions {
  Target target = Target::binary;
  std::uint64_t seed = 1;
  double train_fraction = 0.6;
  bool resplit_per_level = false;  // default reuses one split across levels
};

struct LadderStep {
  std::vector<int> subset;  // feature indices, ascending
  double accuracy = 0.0;    // holdout accuracy of this subset
  int removed = -1;         // feature dropped to reach this step, -1 at the top
};

struct PredictorLadder {
  PredictorKind kind = PredictorKind::reptree;
  std::vector<LadderStep> steps;  // sizes n down to 1
};

struct AgreementRow {
  int size = 0;
  std::vector<int> common;  // intersection of every ladder's subset here
  bool exact = false;       // all ladders picked the identical subset
};

struct FeatselHierarchy {
  std::vector<PredictorLadder> ladders;
  std::vector<AgreementRow> agreement;  // per size, descending
  // (predictor, size) pairs whose subset no other ladder chose at that size
  std::vector<std::pair<PredictorKind, int>> exclusive;
};

// Ladder per spec entry: evaluate all single-feature removals on the seeded
// holdout, carry the best subset down, ties broken by lexicographic sorted
// feature names. Training errors surface as PredictorFailure with the
// offending predictor and subset in the message.
FeatselHierarchy backward_eliminate(const CompiledDataset& data,
                                    const std::vector<PredictorSpec>& specs,
                                    FeatselOptions opts = {});

// Delimited text: predictor, level size, sorted feature names, accuracy.
std::string format_hierarchy(const FeatselHierarchy& h);

}  // namespace walksense
