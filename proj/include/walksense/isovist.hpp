#pragma once
// Forward-facing visibility polygons against a 2-D obstacle map and the four
// isovist descriptors (area, perimeter, compactness, occlusivity).

#include <optional>
#include <string>
#include <vector>

#include "walksense/types.hpp"

namespace walksense {

struct DegenerateStep : Error {
  using Error::Error;
};
struct OriginInsideObstacle : Error {
  using Error::Error;
};
struct DegeneratePolygon : Error {
  using Error::Error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ObstacleMap {
  // Simple polygons (building footprints), counterclockwise, meters.
  std::vector<std::vector<Point>> polygons;
};

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kIsovistRadiusM = 100.0;

// Local equirectangular projection around (origin_lat, origin_lon):
// x = R cos(origin_lat) dlon, y = R dlat, angles in radians internally.
Point project_gps(double lat, double lon, double origin_lat, double origin_lon);
void unproject_gps(const Point& p, double origin_lat, double origin_lon,
                   double& lat, double& lon);

// Walk direction between consecutive fixes. Throws DegenerateStep when the
// two points coincide; callers keep the previous heading in that case.
double heading(const Point& prev, const Point& curr);

// Stateful wrapper implementing the reuse rule for stationary fixes.
class HeadingTracker {
 public:
  double update(const Point& prev, const Point& curr);

 private:
  std::optional<double> last_;
};

// GeoJSON FeatureCollection of Polygon / MultiPolygon footprints (WGS-84),
// reprojected into the local frame and normalized counterclockwise. Holes
// are ignored.
ObstacleMap load_obstacles(const std::string& path, double origin_lat,
                           double origin_lon);

// 181 uniform 1-degree rays spanning [heading - 90, heading + 90] degrees,
// augmented with rays aimed at every obstacle vertex in the fan (plus a
// small angular nudge to each side, catching silhouette jumps). Each vertex
// is the nearest obstacle hit or the range cap. polygon[0] is the origin.
std::vector<Point> visibility_polygon(const Point& origin, double heading_rad,
                                      const ObstacleMap& obstacles,
                                      double fov_rad = 3.14159265358979323846,
                                      double radius = kIsovistRadiusM,
                                      double angular_step_rad = 0.01745329251994330);

// Shoelace area, boundary length, 4*pi*A/P^2, and the summed length of
// boundary segments that lie neither on an obstacle edge (within 1e-6 m)
// nor on the range arc nor on the two fov-limit radii. With fan == true the
// polygon is treated as a visibility fan whose first vertex is the origin;
// fan == false skips the arc/radii classification (test geometry).
IsovistDescriptor descriptors(const std::vector<Point>& polygon,
                              const ObstacleMap& obstacles,
                              double radius = kIsovistRadiusM, bool fan = true);

}  // namespace walksense
