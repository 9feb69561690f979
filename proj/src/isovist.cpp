#include "walksense/isovist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "walksense/io.hpp"

namespace walksense {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kVertexNudgeRad = 1e-5;
constexpr double kOnEdgeTol = 1e-6;  // m

double cross(const Point& a, const Point& b) { return a.x * b.y - a.y * b.x; }
double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
Point sub(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
double norm(const Point& a) { return std::hypot(a.x, a.y); }

double polygon_signed_area(const std::vector<Point>& poly) {
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    acc += p.x * q.y - p.y * q.x;
  }
  return 0.5 * acc;
}

// Strict interior test by crossing number; boundary points count as outside.
bool strictly_inside(const Point& p, const std::vector<Point>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[j];
    const Point& b = poly[i];
    const Point ab = sub(b, a);
    const Point ap = sub(p, a);
    const double c = cross(ab, ap);
    const double t = dot(ap, ab);
    if (std::abs(c) <= 1e-12 * (1.0 + norm(ab)) && t >= -1e-12 &&
        t <= dot(ab, ab) + 1e-12)
      return false;  // on boundary
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (x_at > p.x) inside = !inside;
    }
  }
  return inside;
}

struct Edge {
  Point a;
  Point b;
};

double point_to_segment_dist(const Point& p, const Point& a, const Point& b) {
  const Point ab = sub(b, a);
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return norm(sub(p, a));
  double t = dot(sub(p, a), ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return norm(sub(p, {a.x + t * ab.x, a.y + t * ab.y}));
}

// Nearest intersection distance of the ray origin + t*dir with the segment,
// or nullopt. dir is unit length.
std::optional<double> ray_segment(const Point& origin, const Point& dir,
                                  const Edge& e) {
  const Point ab = sub(e.b, e.a);
  const Point ao = sub(e.a, origin);
  const double denom = cross(dir, ab);
  if (std::abs(denom) < 1e-15) {
    if (std::abs(cross(ao, dir)) > 1e-12) return std::nullopt;  // parallel, offset
    const double ta = dot(ao, dir);
    const double tb = dot(sub(e.b, origin), dir);
    const double t = std::min(std::max(ta, 0.0), std::max(tb, 0.0));
    if (std::max(ta, tb) < 1e-9) return std::nullopt;  // behind the origin
    return std::max(t, 1e-9);
  }
  const double t = cross(ao, ab) / denom;
  const double s = cross(ao, dir) / denom;
  if (t < 1e-9 || s < -1e-12 || s > 1.0 + 1e-12) return std::nullopt;
  return t;
}

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

Point project_gps(double lat, double lon, double origin_lat, double origin_lon) {
  const double lat0 = origin_lat * kDegToRad;
  return {kEarthRadiusM * std::cos(lat0) * (lon - origin_lon) * kDegToRad,
          kEarthRadiusM * (lat - origin_lat) * kDegToRad};
}

void unproject_gps(const Point& p, double origin_lat, double origin_lon, double& lat,
                   double& lon) {
  const double lat0 = origin_lat * kDegToRad;
  lat = origin_lat + p.y / kEarthRadiusM / kDegToRad;
  lon = origin_lon + p.x / (kEarthRadiusM * std::cos(lat0)) / kDegToRad;
}

double heading(const Point& prev, const Point& curr) {
  if (prev.x == curr.x && prev.y == curr.y)
    throw DegenerateStep("heading: consecutive fixes coincide");
  return std::atan2(curr.y - prev.y, curr.x - prev.x);
}

double HeadingTracker::update(const Point& prev, const Point& curr) {
  if (prev.x == curr.x && prev.y == curr.y) {
    if (!last_) throw DegenerateStep("heading: stationary start, no prior heading");
    return *last_;
  }
  last_ = heading(prev, curr);
  return *last_;
}

ObstacleMap load_obstacles(const std::string& path, double origin_lat,
                           double origin_lon) {
  std::ifstream in(path);
  if (!in) throw IoFailure("load_obstacles: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRow("load_obstacles: " + path + ": " + e.what());
  }

  ObstacleMap map;
  auto add_ring = [&](const nlohmann::json& ring) {
    std::vector<Point> poly;
    for (const auto& coord : ring) {
      const double lon = coord.at(0).get<double>();
      const double lat = coord.at(1).get<double>();
      poly.push_back(project_gps(lat, lon, origin_lat, origin_lon));
    }
    if (poly.size() >= 2 && std::abs(poly.front().x - poly.back().x) < 1e-12 &&
        std::abs(poly.front().y - poly.back().y) < 1e-12)
      poly.pop_back();  // GeoJSON rings repeat the first vertex
    if (poly.size() < 3)
      throw MalformedRow("load_obstacles: " + path + ": ring with < 3 vertices");
    if (polygon_signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
    map.polygons.push_back(std::move(poly));
  };

  try {
    for (const auto& feature : doc.at("features")) {
      const auto& geom = feature.at("geometry");
      const std::string type = geom.at("type").get<std::string>();
      if (type == "Polygon") {
        add_ring(geom.at("coordinates").at(0));
      } else if (type == "MultiPolygon") {
        for (const auto& part : geom.at("coordinates")) add_ring(part.at(0));
      } else {
        throw MalformedRow("load_obstacles: " + path + ": unsupported geometry '" +
                           type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRow("load_obstacles: " + path + ": " + e.what());
  }
  return map;
}

std::vector<Point> visibility_polygon(const Point& origin, double heading_rad,
                                      const ObstacleMap& obstacles, double fov_rad,
                                      double radius, double angular_step_rad) {
  for (const auto& poly : obstacles.polygons)
    if (strictly_inside(origin, poly))
      throw OriginInsideObstacle("visibility_polygon: origin inside a footprint");

  // Edges that can matter lie inside the range box around the origin.
  std::vector<Edge> edges;
  for (const auto& poly : obstacles.polygons) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % poly.size()];
      if (std::max(a.x, b.x) < origin.x - radius) continue;
      if (std::min(a.x, b.x) > origin.x + radius) continue;
      if (std::max(a.y, b.y) < origin.y - radius) continue;
      if (std::min(a.y, b.y) > origin.y + radius) continue;
      edges.push_back({a, b});
    }
  }

  const double half = 0.5 * fov_rad;
  std::vector<double> offsets;  // angle within [-half, half] relative to heading
  const int steps = static_cast<int>(std::round(fov_rad / angular_step_rad));
  offsets.reserve(steps + 1 + 3 * edges.size());
  for (int k = 0; k <= steps; ++k) offsets.push_back(-half + k * angular_step_rad);
  for (const Edge& e : edges) {
    for (const Point* v : {&e.a, &e.b}) {
      const Point d = sub(*v, origin);
      const double r = norm(d);
      if (r < 1e-9 || r > radius) continue;
      const double off = wrap_angle(std::atan2(d.y, d.x) - heading_rad);
      for (const double nudged :
           {off - kVertexNudgeRad, off, off + kVertexNudgeRad}) {
        if (nudged >= -half && nudged <= half) offsets.push_back(nudged);
      }
    }
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end(),
                            [](double a, double b) { return b - a < 1e-9; }),
                offsets.end());

  std::vector<Point> polygon;
  polygon.reserve(offsets.size() + 1);
  polygon.push_back(origin);
  for (const double off : offsets) {
    const double theta = heading_rad + off;
    const Point dir = {std::cos(theta), std::sin(theta)};
    double t = radius;
    for (const Edge& e : edges) {
      const std::optional<double> hit = ray_segment(origin, dir, e);
      if (hit && *hit < t) t = *hit;
    }
    polygon.push_back({origin.x + t * dir.x, origin.y + t * dir.y});
  }
  return polygon;
}

IsovistDescriptor descriptors(const std::vector<Point>& polygon,
                              const ObstacleMap& obstacles, double radius, bool fan) {
  if (polygon.size() < 3)
    throw DegeneratePolygon("descriptors: fewer than 3 vertices");
  const double area = std::abs(polygon_signed_area(polygon));
  if (area < 1e-9) throw DegeneratePolygon("descriptors: vanishing area");

  double perimeter = 0.0;
  double occlusivity = 0.0;
  const Point origin = polygon.front();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point& p = polygon[i];
    const Point& q = polygon[(i + 1) % polygon.size()];
    const double len = norm(sub(q, p));
    perimeter += len;
    if (len < 1e-12) continue;

    if (fan) {
      // The two edges incident to the origin are the fov-limit radii.
      if (i == 0 || i + 1 == polygon.size()) continue;
      const double rp = norm(sub(p, origin));
      const double rq = norm(sub(q, origin));
      if (rp >= radius - kOnEdgeTol && rq >= radius - kOnEdgeTol) continue;  // arc
    }

    const Point mid = {0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
    bool on_obstacle = false;
    for (const auto& poly : obstacles.polygons) {
      for (std::size_t j = 0; j < poly.size() && !on_obstacle; ++j) {
        const Point& a = poly[j];
        const Point& b = poly[(j + 1) % poly.size()];
        if (point_to_segment_dist(mid, a, b) <= kOnEdgeTol &&
            point_to_segment_dist(p, a, b) <= 1e-3 &&
            point_to_segment_dist(q, a, b) <= 1e-3)
          on_obstacle = true;
      }
      if (on_obstacle) break;
    }
    if (!on_obstacle) occlusivity += len;
  }

  IsovistDescriptor d;
  d.area = area;
  d.perimeter = perimeter;
  d.compactness = 4.0 * kPi * area / (perimeter * perimeter);
  d.occlusivity = occlusivity;
  return d;
}

}  // namespace walksense
