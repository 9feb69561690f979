#include "walksense/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace walksense {

namespace {

constexpr double kRowStep = 0.8660254037844386;  // sqrt(3)/2, hex row spacing

std::vector<std::vector<double>> scaled_rows(const CompiledDataset& data,
                                             std::vector<double>& mean,
                                             std::vector<double>& sd) {
  const std::size_t n = data.rows.size();
  mean.assign(kNumFeatures, 0.0);
  sd.assign(kNumFeatures, 1.0);
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i)
    rows[i].assign(data.rows[i].features.begin(), data.rows[i].features.end());

  for (int f = 0; f < kNumFeatures; ++f) {
    double m = 0.0;
    for (const auto& r : rows) m += r[f];
    m /= double(n);
    double var = 0.0;
    for (const auto& r : rows) var += (r[f] - m) * (r[f] - m);
    var = n > 1 ? var / double(n - 1) : 0.0;
    mean[f] = m;
    sd[f] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  for (auto& r : rows)
    for (int f = 0; f < kNumFeatures; ++f) r[f] = (r[f] - mean[f]) / sd[f];
  return rows;
}

int nearest_node(const std::vector<std::vector<double>>& codebook,
                 const std::vector<double>& x, double* dist_out) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < codebook.size(); ++j) {
    double d = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double diff = codebook[j][f] - x[f];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  if (dist_out) *dist_out = std::sqrt(best_d);
  return best;
}

// Linear radius decay across one phase; a single-epoch phase uses the end value.
double phase_radius(double start, double end, int epoch, int total) {
  if (total <= 1) return end;
  return start + (end - start) * double(epoch) / double(total - 1);
}

}  // namespace

double SomGrid::node_y(int node) const { return (node / width) * kRowStep; }

SomGrid train_som(const CompiledDataset& data, SomParams params) {
  if (data.rows.empty()) throw EmptyData("train_som: no rows");
  if (params.width < 1 || params.height < 1 || params.epochs < 1 ||
      params.finetune < 0)
    throw Error("train_som: bad grid or epoch parameters");

  SomGrid som;
  som.width = params.width;
  som.height = params.height;
  const std::vector<std::vector<double>> rows =
      scaled_rows(data, som.scale_mean, som.scale_sd);
  const std::size_t n = rows.size();
  const int nodes = som.nodes();

  std::vector<double> lo(kNumFeatures, std::numeric_limits<double>::infinity());
  std::vector<double> hi(kNumFeatures, -std::numeric_limits<double>::infinity());
  for (const auto& r : rows)
    for (int f = 0; f < kNumFeatures; ++f) {
      lo[f] = std::min(lo[f], r[f]);
      hi[f] = std::max(hi[f], r[f]);
    }

  std::mt19937_64 rng(params.seed);
  som.codebook.assign(nodes, std::vector<double>(kNumFeatures, 0.0));
  for (auto& code : som.codebook)
    for (int f = 0; f < kNumFeatures; ++f) {
      std::uniform_real_distribution<double> u(lo[f], hi[f]);
      code[f] = lo[f] < hi[f] ? u(rng) : lo[f];
    }

  // Squared grid distances between nodes, reused every epoch.
  std::vector<double> grid_d2(std::size_t(nodes) * nodes, 0.0);
  for (int a = 0; a < nodes; ++a)
    for (int b = 0; b < nodes; ++b) {
      const double dx = som.node_x(a) - som.node_x(b);
      const double dy = som.node_y(a) - som.node_y(b);
      grid_d2[std::size_t(a) * nodes + b] = dx * dx + dy * dy;
    }

  const double r0 = std::max(params.width, params.height) / 2.0;
  std::vector<int> bmu(n, 0);
  std::vector<std::vector<double>> sums(nodes,
                                        std::vector<double>(kNumFeatures, 0.0));
  std::vector<double> counts(nodes, 0.0);

  const int total_epochs = params.epochs + params.finetune;
  for (int e = 0; e <= total_epochs; ++e) {
    double qe = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      bmu[i] = nearest_node(som.codebook, rows[i], &d);
      qe += d;
    }
    som.qe_trace.push_back(qe / double(n));
    if (e == total_epochs) break;  // final pass only measures

    const double radius =
        e < params.epochs
            ? phase_radius(r0, 1.0, e, params.epochs)
            : phase_radius(1.0, 0.5, e - params.epochs, params.finetune);
    const double inv = 1.0 / (2.0 * radius * radius);

    for (int j = 0; j < nodes; ++j) {
      counts[j] = 0.0;
      std::fill(sums[j].begin(), sums[j].end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      counts[bmu[i]] += 1.0;
      for (int f = 0; f < kNumFeatures; ++f) sums[bmu[i]][f] += rows[i][f];
    }
    for (int j = 0; j < nodes; ++j) {
      double den = 0.0;
      std::vector<double> num(kNumFeatures, 0.0);
      for (int b = 0; b < nodes; ++b) {
        if (counts[b] == 0.0) continue;
        const double h = std::exp(-grid_d2[std::size_t(j) * nodes + b] * inv);
        den += h * counts[b];
        for (int f = 0; f < kNumFeatures; ++f) num[f] += h * sums[b][f];
      }
      if (den <= 0.0) continue;  // no mass in reach, keep the codebook
      for (int f = 0; f < kNumFeatures; ++f) som.codebook[j][f] = num[f] / den;
    }
  }

  som.trained = true;
  return som;
}

int bmu_node(const SomGrid& som, const std::vector<double>& features) {
  if (!som.trained) throw Untrained("bmu_node: untrained map");
  std::vector<double> scaled(kNumFeatures, 0.0);
  for (int f = 0; f < kNumFeatures; ++f)
    scaled[f] = (features[f] - som.scale_mean[f]) / som.scale_sd[f];
  return nearest_node(som.codebook, scaled, nullptr);
}

std::vector<std::vector<double>> u_matrix(const SomGrid& som) {
  if (!som.trained) throw Untrained("u_matrix: untrained map");
  std::vector<std::vector<double>> grid(
      som.height, std::vector<double>(som.width, 0.0));
  for (int a = 0; a < som.nodes(); ++a) {
    double total = 0.0;
    int neighbors = 0;
    for (int b = 0; b < som.nodes(); ++b) {
      if (b == a) continue;
      const double dx = som.node_x(a) - som.node_x(b);
      const double dy = som.node_y(a) - som.node_y(b);
      if (dx * dx + dy * dy > 1.1) continue;  // hex neighbors sit at distance 1
      double d = 0.0;
      for (int f = 0; f < kNumFeatures; ++f) {
        const double diff = som.codebook[a][f] - som.codebook[b][f];
        d += diff * diff;
      }
      total += std::sqrt(d);
      ++neighbors;
    }
    grid[a / som.width][a % som.width] = neighbors ? total / neighbors : 0.0;
  }
  return grid;
}

std::vector<std::vector<double>> f_matrix(const SomGrid& som, int feature) {
  if (!som.trained) throw Untrained("f_matrix: untrained map");
  if (feature < 0 || feature >= kNumFeatures)
    throw Error("f_matrix: feature index out of range");
  std::vector<std::vector<double>> grid(
      som.height, std::vector<double>(som.width, 0.0));
  for (int j = 0; j < som.nodes(); ++j)
    grid[j / som.width][j % som.width] =
        som.codebook[j][feature] * som.scale_sd[feature] +
        som.scale_mean[feature];
  return grid;
}

std::vector<std::vector<LNode>> l_matrix(const SomGrid& som,
                                         const CompiledDataset& data) {
  if (!som.trained) throw Untrained("l_matrix: untrained map");
  struct Tally {
    long a = 0, n = 0;
    std::map<std::string, long> by_participant;
  };
  std::vector<Tally> tally(som.nodes());
  for (const CompiledRow& row : data.rows) {
    const int j = bmu_node(
        som, std::vector<double>(row.features.begin(), row.features.end()));
    (row.binary == BinaryLabel::A ? tally[j].a : tally[j].n)++;
    ++tally[j].by_participant[row.participant_id];
  }

  std::vector<std::vector<LNode>> grid(som.height,
                                       std::vector<LNode>(som.width));
  for (int j = 0; j < som.nodes(); ++j) {
    const Tally& t = tally[j];
    LNode& node = grid[j / som.width][j % som.width];
    node.rows = t.a + t.n;
    if (node.rows == 0) continue;
    node.empty = false;
    node.label = t.a >= t.n ? BinaryLabel::A : BinaryLabel::N;
    long best = 0;
    for (const auto& [id, count] : t.by_participant)
      if (count > best) {  // map order makes ties pick the lower id
        best = count;
        node.participant_id = id;
      }
  }
  return grid;
}

std::string format_matrix(const std::vector<std::vector<double>>& grid) {
  std::ostringstream os;
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

std::string format_labels(const std::vector<std::vector<LNode>>& grid) {
  std::ostringstream os;
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (row[i].empty)
        os << '.';
      else
        os << label_name(row[i].label) << ':' << row[i].participant_id;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace walksense
