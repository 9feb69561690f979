#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "support/synthdata.hpp"
#include "walksense/som.hpp"

using namespace walksense;
using testsupport::two_cluster_compiled;

namespace {

std::vector<double> row_features(const CompiledRow& r) {
  return std::vector<double>(r.features.begin(), r.features.end());
}

}  // namespace

TEST_CASE("the hexagonal layout has unit neighbor spacing") {
  SomGrid g;
  g.width = 4;
  g.height = 4;
  // horizontal neighbor
  CHECK(std::hypot(g.node_x(1) - g.node_x(0), g.node_y(1) - g.node_y(0)) ==
        doctest::Approx(1.0));
  // the two diagonal neighbors across rows
  const int below = g.node_at(0, 1);
  CHECK(std::hypot(g.node_x(below) - g.node_x(0),
                   g.node_y(below) - g.node_y(0)) == doctest::Approx(1.0));
  CHECK(std::hypot(g.node_x(below) - g.node_x(1),
                   g.node_y(below) - g.node_y(1)) == doctest::Approx(1.0));
}

TEST_CASE("training requires data and sane dimensions") {
  CHECK_THROWS_AS(train_som(CompiledDataset{}), EmptyData);
  const CompiledDataset d = two_cluster_compiled(20, 1);
  SomParams bad;
  bad.width = 0;
  CHECK_THROWS_AS(train_som(d, bad), Error);
}

TEST_CASE("planted clusters map to disjoint regions with a ridge between") {
  const CompiledDataset d = two_cluster_compiled(800, 5);
  SomParams params;
  params.width = 12;
  params.height = 12;
  const SomGrid som = train_som(d, params);
  REQUIRE(som.trained);
  REQUIRE(int(som.codebook.size()) == som.nodes());

  std::set<int> nodes_a, nodes_b;
  for (const CompiledRow& r : d.rows) {
    const int j = bmu_node(som, row_features(r));
    (r.binary == BinaryLabel::A ? nodes_b : nodes_a).insert(j);
  }
  std::set<int> overlap;
  std::set_intersection(nodes_a.begin(), nodes_a.end(), nodes_b.begin(),
                        nodes_b.end(), std::inserter(overlap, overlap.begin()));
  CHECK(overlap.empty());

  const std::vector<std::vector<double>> u = u_matrix(som);
  REQUIRE(int(u.size()) == som.height);
  std::vector<double> hit, idle;
  double max_idle = 0.0;
  for (int gy = 0; gy < som.height; ++gy)
    for (int gx = 0; gx < som.width; ++gx) {
      const int j = som.node_at(gx, gy);
      const bool used = nodes_a.count(j) || nodes_b.count(j);
      if (used)
        hit.push_back(u[gy][gx]);
      else
        max_idle = std::max(max_idle, u[gy][gx]);
    }
  REQUIRE(!hit.empty());
  std::nth_element(hit.begin(), hit.begin() + hit.size() / 2, hit.end());
  const double median_hit = hit[hit.size() / 2];
  CHECK(max_idle > 2.0 * median_hit);
}

TEST_CASE("quantization error does not rise from rough to fine-tune") {
  const CompiledDataset d = two_cluster_compiled(400, 9);
  SomParams params;
  params.width = 10;
  params.height = 10;
  params.epochs = 12;
  params.finetune = 8;
  const SomGrid som = train_som(d, params);
  REQUIRE(som.qe_trace.size() == std::size_t(params.epochs + params.finetune + 1));
  const double rough_end = som.qe_trace[params.epochs];
  CHECK(som.qe_trace.back() <= rough_end + 1e-9);
  CHECK(som.qe_trace.back() <= som.qe_trace.front());
}

TEST_CASE("bmu lookup is exact for codebook vectors") {
  const CompiledDataset d = two_cluster_compiled(200, 13);
  SomParams params;
  params.width = 6;
  params.height = 6;
  const SomGrid som = train_som(d, params);
  for (int j = 0; j < som.nodes(); j += 7) {
    std::vector<double> original(kNumFeatures);
    for (int f = 0; f < kNumFeatures; ++f)
      original[f] = som.codebook[j][f] * som.scale_sd[f] + som.scale_mean[f];
    CHECK(bmu_node(som, original) == j);
  }
  CHECK_THROWS_AS(bmu_node(SomGrid{}, std::vector<double>(9, 0.0)), Untrained);
}

TEST_CASE("component planes come back in original units") {
  const CompiledDataset d = two_cluster_compiled(300, 17);
  SomParams params;
  params.width = 8;
  params.height = 8;
  const SomGrid som = train_som(d, params);
  const std::vector<std::vector<double>> plane = f_matrix(som, 0);
  double lo = 1e99, hi = -1e99;
  for (const CompiledRow& r : d.rows) {
    lo = std::min(lo, r.features[0]);
    hi = std::max(hi, r.features[0]);
  }
  for (int gy = 0; gy < som.height; ++gy)
    for (int gx = 0; gx < som.width; ++gx) {
      CHECK(plane[gy][gx] >= lo - 5.0);
      CHECK(plane[gy][gx] <= hi + 5.0);
    }
}

TEST_CASE("label map majorities follow the assigned rows") {
  const CompiledDataset d = two_cluster_compiled(400, 21);
  SomParams params;
  params.width = 8;
  params.height = 8;
  const SomGrid som = train_som(d, params);
  const auto labels = l_matrix(som, d);
  long used = 0;
  for (int gy = 0; gy < som.height; ++gy)
    for (int gx = 0; gx < som.width; ++gx) {
      const LNode& node = labels[gy][gx];
      if (node.empty) continue;
      ++used;
      CHECK(node.rows > 0);
      CHECK((node.participant_id == "p01" || node.participant_id == "p02"));
      // clusters are class-pure, so participant and label agree
      if (node.label == BinaryLabel::A)
        CHECK(node.participant_id == "p02");
      else
        CHECK(node.participant_id == "p01");
    }
  CHECK(used > 0);
}

TEST_CASE("matrix and label formatting have grid shape") {
  const CompiledDataset d = two_cluster_compiled(100, 25);
  SomParams params;
  params.width = 5;
  params.height = 4;
  const SomGrid som = train_som(d, params);
  const std::string u = format_matrix(u_matrix(som));
  CHECK(std::count(u.begin(), u.end(), '\n') == 4);
  const std::string l = format_labels(l_matrix(som, d));
  CHECK(std::count(l.begin(), l.end(), '\n') == 4);
}
