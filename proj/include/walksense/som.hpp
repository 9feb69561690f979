#pragma once
// Batch-trained hexagonal self-organizing map over the nine-feature rows,
// with U-matrix, per-feature component planes, and majority-label map.

#include <cstdint>
#include <string>
#include <vector>

#include "walksense/types.hpp"

namespace walksense {

struct EmptyData : Error {
  using Error::Error;
};
struct Untrained : Error {
  using Error::Error;
};

struct SomParams {
  int width = 20;
  int height = 20;
  int epochs = 25;    // rough phase, radius max(w,h)/2 -> 1
  int finetune = 20;  // fine-tune phase, radius 1 -> 0.5
  std::uint64_t seed = 1;
};

// Offset hexagonal layout with unit nearest-neighbor distance; codebooks live
// in the unit-variance scaled feature space, scale_mean/scale_sd map back.
struct SomGrid {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> codebook;  // [node][feature], scaled space
  std::vector<double> scale_mean;
  std::vector<double> scale_sd;
  std::vector<double> qe_trace;  // mean row-to-BMU distance entering each epoch
  bool trained = false;

  int nodes() const { return width * height; }
  int node_at(int gx, int gy) const { return gy * width + gx; }
  double node_x(int node) const {
    return node % width + 0.5 * ((node / width) % 2);
  }
  double node_y(int node) const;
};

// Batch SOM: per epoch assign every row to its best-matching unit, then set
// each codebook to the neighborhood-weighted mean of the assigned rows.
// Gaussian kernel, radius decaying linearly per phase; seeded uniform
// initialization within the scaled data range.
SomGrid train_som(const CompiledDataset& data, SomParams params = {});

// Nearest codebook (Euclidean, scaled space); features in original units.
int bmu_node(const SomGrid& som, const std::vector<double>& features);

// Per node, mean codebook distance to the hexagonal neighbors (6 interior,
// fewer at edges), in scaled space.
std::vector<std::vector<double>> u_matrix(const SomGrid& som);

// Component plane for one feature, reported in original units.
std::vector<std::vector<double>> f_matrix(const SomGrid& som, int feature);

struct LNode {
  bool empty = true;
  BinaryLabel label = BinaryLabel::N;  // majority, ties toward A
  std::string participant_id;          // majority, ties toward the lower id
  long rows = 0;
};

std::vector<std::vector<LNode>> l_matrix(const SomGrid& som,
                                         const CompiledDataset& data);

// Delimited grid (rows bottom-up as stored), one value per cell.
std::string format_matrix(const std::vector<std::vector<double>>& grid);
std::string format_labels(const std::vector<std::vector<LNode>>& grid);

}  // namespace walksense
