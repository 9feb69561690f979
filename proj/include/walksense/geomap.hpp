#pragma once
// Geo-referenced mean response: project rows to local meters, snap to a
// g-meter grid, average nscr per participant first and across participants
// second, min-max normalize, export GeoJSON points.

#include <string>
#include <utility>
#include <vector>

#include "walksense/types.hpp"

namespace walksense {

struct NoGps : Error {
  using Error::Error;
};
struct EmptyBins : Error {
  using Error::Error;
};

struct GeoBin {
  int gx = 0;
  int gy = 0;
  double centroid_lat = 0.0;
  double centroid_lon = 0.0;
  // one entry per contributing participant: id, mean nscr within the cell
  std::vector<std::pair<std::string, double>> contributions;
  double r_mean = 0.0;
  double r_norm = 0.0;
};

// Rows without a finite GPS fix are skipped; all skipped -> NoGps. The first
// usable fix anchors the local projection. divide_by_total divides by the
// dataset's participant count instead of the cell's contributor count.
std::vector<GeoBin> bin(const CompiledDataset& data, double g = 10.0,
                        bool divide_by_total = false);

// r_norm = (r_mean - min)/(max - min); all-equal collapses to 0.5.
void normalize(std::vector<GeoBin>& bins);

// FeatureCollection of Points at cell centroids with properties
// {r_mean, r_norm, n_participants}.
void export_geojson(const std::vector<GeoBin>& bins, const std::string& path);
std::string geojson_text(const std::vector<GeoBin>& bins);

}  // namespace walksense
