#include "walksense/geomap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "nlohmann/json.hpp"
#include "walksense/io.hpp"
#include "walksense/isovist.hpp"

namespace walksense {

std::vector<GeoBin> bin(const CompiledDataset& data, double g,
                        bool divide_by_total) {
  if (g <= 0.0) throw Error("bin: grid resolution must be positive");

  const CompiledRow* anchor = nullptr;
  std::set<std::string> all_participants;
  for (const CompiledRow& row : data.rows) {
    all_participants.insert(row.participant_id);
    if (!anchor && std::isfinite(row.gps_lat) && std::isfinite(row.gps_lon))
      anchor = &row;
  }
  if (!anchor) throw NoGps("bin: no row carries a usable GPS fix");

  struct CellAcc {
    std::map<std::string, std::pair<double, long>> per_participant;  // sum, n
  };
  std::map<std::pair<int, int>, CellAcc> cells;
  for (const CompiledRow& row : data.rows) {
    if (!std::isfinite(row.gps_lat) || !std::isfinite(row.gps_lon)) continue;
    const Point p =
        project_gps(row.gps_lat, row.gps_lon, anchor->gps_lat, anchor->gps_lon);
    const std::pair<int, int> key{int(std::floor(p.x / g)),
                                  int(std::floor(p.y / g))};
    auto& acc = cells[key].per_participant[row.participant_id];
    acc.first += double(row.nscr);
    acc.second += 1;
  }

  std::vector<GeoBin> bins;
  bins.reserve(cells.size());
  for (const auto& [key, acc] : cells) {
    GeoBin b;
    b.gx = key.first;
    b.gy = key.second;
    unproject_gps(Point{(b.gx + 0.5) * g, (b.gy + 0.5) * g}, anchor->gps_lat,
                  anchor->gps_lon, b.centroid_lat, b.centroid_lon);
    double total = 0.0;
    for (const auto& [id, sums] : acc.per_participant) {
      const double mean = sums.first / double(sums.second);
      b.contributions.emplace_back(id, mean);
      total += mean;
    }
    const double n = divide_by_total ? double(all_participants.size())
                                     : double(b.contributions.size());
    b.r_mean = total / n;
    bins.push_back(std::move(b));
  }
  return bins;
}

void normalize(std::vector<GeoBin>& bins) {
  if (bins.empty()) return;
  double lo = bins.front().r_mean, hi = lo;
  for (const GeoBin& b : bins) {
    lo = std::min(lo, b.r_mean);
    hi = std::max(hi, b.r_mean);
  }
  for (GeoBin& b : bins)
    b.r_norm = hi > lo ? (b.r_mean - lo) / (hi - lo) : 0.5;
}

std::string geojson_text(const std::vector<GeoBin>& bins) {
  if (bins.empty()) throw EmptyBins("export_geojson: no bins");
  nlohmann::json features = nlohmann::json::array();
  for (const GeoBin& b : bins) {
    features.push_back({
        {"type", "Feature"},
        {"geometry",
         {{"type", "Point"},
          {"coordinates", {b.centroid_lon, b.centroid_lat}}}},
        {"properties",
         {{"r_mean", b.r_mean},
          {"r_norm", b.r_norm},
          {"n_participants", b.contributions.size()}}},
    });
  }
  const nlohmann::json doc = {{"type", "FeatureCollection"},
                              {"features", features}};
  return doc.dump(2) + "\n";
}

void export_geojson(const std::vector<GeoBin>& bins, const std::string& path) {
  const std::string text = geojson_text(bins);
  std::ofstream out(path);
  if (!out) throw IoFailure("export_geojson: cannot open " + path);
  out << text;
  if (!out) throw IoFailure("export_geojson: write failed for " + path);
}

}  // namespace walksense
