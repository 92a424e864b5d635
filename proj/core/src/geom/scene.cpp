#include <prefnav/geom/scene.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace prefnav::geom {
namespace {

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) noexcept {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + u * ab);
}

// Ray parameter of the hit against segment [a, b], or +inf.
double ray_segment(const Vec2& o, const Vec2& d, const Vec2& a, const Vec2& b) noexcept {
  const Vec2 e = b - a;
  const double denom = d.cross(e);
  if (std::abs(denom) < 1e-15) return std::numeric_limits<double>::infinity();
  const Vec2 ao = a - o;
  const double t = ao.cross(e) / denom;
  const double u = ao.cross(d) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::numeric_limits<double>::infinity();
  return t;
}

double ray_circle(const Vec2& o, const Vec2& d, const Circle& c) noexcept {
  const Vec2 oc = o - c.center;
  const double b = oc.dot(d);
  const double cc = oc.dot(oc) - c.radius * c.radius;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double s = std::sqrt(disc);
  const double t0 = -b - s;
  if (t0 >= 0.0) return t0;
  const double t1 = -b + s;
  return t1 >= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

Vec2 json_point(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw Error("scene: point must be [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Polygon json_polygon(const nlohmann::json& j) {
  Polygon poly;
  for (const auto& p : j) poly.push_back(json_point(p));
  return poly;
}

nlohmann::json polygon_json(const Polygon& poly) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : poly) arr.push_back({p.x, p.y});
  return arr;
}

}  // namespace

bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) noexcept {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polygon_edges(const Vec2& p, std::span<const Vec2> poly) noexcept {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) best = std::min(best, segment_distance(p, poly[j], poly[i]));
  return best;
}

Scene::Scene(std::string id, Rect bounds, std::vector<Polygon> polygons, std::vector<Circle> circles,
             Polygon spawn_region)
    : id_(std::move(id)),
      bounds_(bounds),
      polygons_(std::move(polygons)),
      circles_(std::move(circles)),
      spawn_region_(std::move(spawn_region)) {
  if (!(bounds_.xmax > bounds_.xmin) || !(bounds_.ymax > bounds_.ymin)) throw Error("scene: empty bounds");
  for (const auto& poly : polygons_) {
    if (poly.size() < 3) throw Error("scene: polygon needs at least 3 vertices");
    for (const auto& p : poly)
      if (!bounds_.contains(p)) throw Error("scene '" + id_ + "': obstacle outside bounds");
  }
  for (const auto& c : circles_) {
    if (!(c.radius > 0.0)) throw Error("scene: circle radius must be positive");
    if (!bounds_.contains(c.center)) throw Error("scene '" + id_ + "': obstacle outside bounds");
  }
  if (!spawn_region_.empty() && spawn_region_.size() < 3) throw Error("scene: spawn region needs 3 vertices");
}

bool Scene::inside_obstacle(const Vec2& p) const noexcept {
  if (!bounds_.contains(p)) return true;
  for (const auto& c : circles_)
    if (distance(p, c.center) <= c.radius) return true;
  for (const auto& poly : polygons_)
    if (point_in_polygon(p, poly)) return true;
  return false;
}

double Scene::clearance(const Vec2& p) const noexcept {
  if (inside_obstacle(p)) return 0.0;
  double best = std::min({p.x - bounds_.xmin, bounds_.xmax - p.x, p.y - bounds_.ymin, bounds_.ymax - p.y});
  for (const auto& c : circles_) best = std::min(best, distance(p, c.center) - c.radius);
  for (const auto& poly : polygons_) best = std::min(best, distance_to_polygon_edges(p, poly));
  return std::max(best, 0.0);
}

bool Scene::in_spawn_region(const Vec2& p) const noexcept {
  if (spawn_region_.empty()) return bounds_.contains(p);
  return point_in_polygon(p, spawn_region_);
}

nlohmann::json Scene::to_json() const {
  nlohmann::json j;
  j["id"] = id_;
  j["bounds"] = {bounds_.xmin, bounds_.ymin, bounds_.xmax, bounds_.ymax};
  j["polygons"] = nlohmann::json::array();
  for (const auto& poly : polygons_) j["polygons"].push_back(polygon_json(poly));
  j["circles"] = nlohmann::json::array();
  for (const auto& c : circles_) j["circles"].push_back({{"c", {c.center.x, c.center.y}}, {"r", c.radius}});
  j["spawn_region"] = polygon_json(spawn_region_);
  return j;
}

Scene Scene::from_json(const nlohmann::json& j) {
  try {
    const auto& b = j.at("bounds");
    if (!b.is_array() || b.size() != 4) throw Error("scene: bounds must be [xmin, ymin, xmax, ymax]");
    Rect bounds{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
    std::vector<Polygon> polys;
    if (j.contains("polygons"))
      for (const auto& p : j.at("polygons")) polys.push_back(json_polygon(p));
    std::vector<Circle> circles;
    if (j.contains("circles"))
      for (const auto& c : j.at("circles")) circles.push_back({json_point(c.at("c")), c.at("r").get<double>()});
    Polygon spawn;
    if (j.contains("spawn_region")) spawn = json_polygon(j.at("spawn_region"));
    return Scene(j.at("id").get<std::string>(), bounds, std::move(polys), std::move(circles), std::move(spawn));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scene: malformed JSON: ") + e.what());
  }
}

Scene Scene::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("scene " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

double raycast(const Scene& scene, const Pose2& origin, double angle_offset, double max_range,
               std::span<const Circle> extra_discs) {
  if (!(max_range > 0.0)) throw Error("raycast: max_range must be positive");
  const Vec2 o = origin.position();
  if (scene.inside_obstacle(o)) return 0.0;
  for (const auto& c : extra_discs)
    if (distance(o, c.center) <= c.radius) return 0.0;

  const double a = origin.theta + angle_offset;
  const Vec2 d{std::cos(a), std::sin(a)};
  const Rect& bb = scene.bounds();
  double best = std::numeric_limits<double>::infinity();
  if (d.x > 0.0) best = std::min(best, (bb.xmax - o.x) / d.x);
  if (d.x < 0.0) best = std::min(best, (bb.xmin - o.x) / d.x);
  if (d.y > 0.0) best = std::min(best, (bb.ymax - o.y) / d.y);
  if (d.y < 0.0) best = std::min(best, (bb.ymin - o.y) / d.y);
  for (const auto& poly : scene.polygons()) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) best = std::min(best, ray_segment(o, d, poly[j], poly[i]));
  }
  for (const auto& c : scene.circles()) best = std::min(best, ray_circle(o, d, c));
  for (const auto& c : extra_discs) best = std::min(best, ray_circle(o, d, c));
  return std::min(best, max_range);
}

OccupancyGrid::OccupancyGrid(const Scene& scene, double cell, double inflation)
    : bounds_(scene.bounds()), cell_(cell) {
  if (!(cell > 0.0)) throw Error("occupancy grid: cell must be positive");
  cols_ = static_cast<int>(std::ceil(bounds_.width() / cell - 1e-9));
  rows_ = static_cast<int>(std::ceil(bounds_.height() / cell - 1e-9));
  occ_.assign(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_), 0);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      occ_[static_cast<std::size_t>(r) * cols_ + c] = scene.clearance(center(c, r)) <= inflation ? 1 : 0;
}

bool OccupancyGrid::occupied(int col, int row) const noexcept {
  if (!in_range(col, row)) return true;
  return occ_[static_cast<std::size_t>(row) * cols_ + col] != 0;
}

Vec2 OccupancyGrid::center(int col, int row) const noexcept {
  return {bounds_.xmin + (col + 0.5) * cell_, bounds_.ymin + (row + 0.5) * cell_};
}

std::pair<int, int> OccupancyGrid::cell_of(const Vec2& p) const noexcept {
  return {static_cast<int>(std::floor((p.x - bounds_.xmin) / cell_)),
          static_cast<int>(std::floor((p.y - bounds_.ymin) / cell_))};
}

}  // namespace prefnav::geom
