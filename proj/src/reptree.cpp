#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "walksense/predictors.hpp"

namespace walksense {

namespace {

double entropy(const std::vector<long>& counts, long total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const long c : counts) {
    if (c == 0) continue;
    const double p = double(c) / double(total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

void RepTreeModel::train(const Table& data) {
  if (data.rows() == 0) throw EmptyTrain("reptree: empty training set");
  if (data.distinct_labels() < 2)
    throw SingleClass("reptree: training labels are all one class");

  nodes_.clear();
  holdout_error_before_ = holdout_error_after_ = 0.0;
  const std::size_t n = data.rows();
  const int num_classes = data.num_classes();
  const int num_features = data.num_features();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params_.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t holdout_n = 0;
  if (params_.pruning)
    holdout_n = std::min<std::size_t>(
        n - 1, static_cast<std::size_t>(std::lround(params_.holdout_fraction * n)));
  const std::vector<std::size_t> prune_rows(order.begin(), order.begin() + holdout_n);
  std::vector<std::size_t> grow_rows(order.begin() + holdout_n, order.end());

  // Recursive growth; children are appended after their parent so the root
  // stays at index 0.
  auto leaf_stats = [&](Node& node, const std::vector<std::size_t>& rows) {
    std::vector<long> counts(num_classes, 0);
    for (const std::size_t r : rows) counts[data.y[r]]++;
    node.majority = static_cast<int>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    node.freqs.resize(num_classes);
    for (int c = 0; c < num_classes; ++c)
      node.freqs[c] = double(counts[c] + 1) / double(rows.size() + num_classes);
  };

  std::function<int(std::vector<std::size_t>&, int)> build =
      [&](std::vector<std::size_t>& rows, int depth) -> int {
    const int me = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    leaf_stats(nodes_[me], rows);

    std::vector<long> counts(num_classes, 0);
    for (const std::size_t r : rows) counts[data.y[r]]++;
    const long total = static_cast<long>(rows.size());
    const bool pure =
        *std::max_element(counts.begin(), counts.end()) == total;
    if (pure || total < 2 * params_.min_leaf ||
        (params_.max_depth > 0 && depth >= params_.max_depth))
      return me;

    const double parent_h = entropy(counts, total);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (int f = 0; f < num_features; ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        vals[i] = {data.x[rows[i]][f], data.y[rows[i]]};
      std::sort(vals.begin(), vals.end());
      std::vector<long> left(num_classes, 0);
      long nl = 0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left[vals[i].second]++;
        ++nl;
        if (vals[i].first == vals[i + 1].first) continue;
        const long nr = total - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        std::vector<long> right(num_classes);
        for (int c = 0; c < num_classes; ++c) right[c] = counts[c] - left[c];
        const double gain = parent_h - (nl * entropy(left, nl) +
                                        nr * entropy(right, nr)) /
                                           double(total);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = f;
          // Midpoint can round up to the right value when the neighbors are
          // adjacent doubles; fall back to the left value so `<=` still
          // separates the two sides.
          const double mid = 0.5 * (vals[i].first + vals[i + 1].first);
          best_threshold = mid < vals[i + 1].first ? mid : vals[i].first;
        }
      }
    }
    if (best_feature < 0) return me;

    std::vector<std::size_t> lrows, rrows;
    for (const std::size_t r : rows)
      (data.x[r][best_feature] <= best_threshold ? lrows : rrows).push_back(r);
    if (lrows.empty() || rrows.empty()) return me;  // degenerate cut
    rows.clear();
    rows.shrink_to_fit();
    nodes_[me].leaf = false;
    nodes_[me].feature = best_feature;
    nodes_[me].threshold = best_threshold;
    const int left = build(lrows, depth + 1);
    nodes_[me].left = left;
    const int right = build(rrows, depth + 1);
    nodes_[me].right = right;
    return me;
  };
  build(grow_rows, 0);

  if (params_.pruning && !prune_rows.empty()) {
    auto mismatches = [&](int majority, const std::vector<std::size_t>& rows) {
      long e = 0;
      for (const std::size_t r : rows)
        if (data.y[r] != majority) ++e;
      return e;
    };
    std::function<long(int, const std::vector<std::size_t>&, bool)> route =
        [&](int ni, const std::vector<std::size_t>& rows, bool prune) -> long {
      Node& node = nodes_[ni];
      if (node.leaf) return mismatches(node.majority, rows);
      std::vector<std::size_t> lrows, rrows;
      for (const std::size_t r : rows)
        (data.x[r][node.feature] <= node.threshold ? lrows : rrows).push_back(r);
      const long subtree = route(node.left, lrows, prune) +
                           route(node.right, rrows, prune);
      if (!prune) return subtree;
      const long as_leaf = mismatches(node.majority, rows);
      if (as_leaf <= subtree) {
        node.leaf = true;  // children stay allocated but unreachable
        return as_leaf;
      }
      return subtree;
    };
    const long before = route(0, prune_rows, false);
    const long after = route(0, prune_rows, true);
    holdout_error_before_ = double(before) / double(prune_rows.size());
    holdout_error_after_ = double(after) / double(prune_rows.size());
  }
}

int RepTreeModel::leaf_for(const std::vector<double>& features) const {
  if (nodes_.empty()) throw UntrainedModel("reptree: predict before train");
  int ni = 0;
  while (!nodes_[ni].leaf) {
    const Node& node = nodes_[ni];
    if (node.feature >= static_cast<int>(features.size()))
      throw Error("reptree: feature vector narrower than training data");
    ni = features[node.feature] <= node.threshold ? node.left : node.right;
  }
  return ni;
}

int RepTreeModel::predict(const std::vector<double>& features) const {
  return nodes_[leaf_for(features)].majority;
}

double RepTreeModel::score(const std::vector<double>& features, int cls) const {
  const Node& leaf = nodes_[leaf_for(features)];
  if (cls < 0 || cls >= static_cast<int>(leaf.freqs.size())) return 0.0;
  return leaf.freqs[cls];
}

bool RepTreeModel::root_is_leaf() const {
  if (nodes_.empty()) throw UntrainedModel("reptree: untrained");
  return nodes_[0].leaf;
}

int RepTreeModel::root_feature() const {
  if (root_is_leaf()) throw Error("reptree: root is a leaf");
  return nodes_[0].feature;
}

double RepTreeModel::root_threshold() const {
  if (root_is_leaf()) throw Error("reptree: root is a leaf");
  return nodes_[0].threshold;
}

}  // namespace walksense
