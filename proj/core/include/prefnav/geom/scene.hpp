#pragma once
/**
 * @file  scene.hpp
 * @brief Polygonal room scenes: collision queries, raycasting and the
 *        JSON scene file format.
 *
 * File format (meters, right-handed, theta from +x):
 *   {"id": str, "bounds": [xmin, ymin, xmax, ymax],
 *    "polygons": [[[x, y], ...], ...],
 *    "circles": [{"c": [x, y], "r": r}, ...],
 *    "spawn_region": [[x, y], ...]}
 * The bounds rectangle is a closed wall around the room.
 */

#include <prefnav/geom/pose.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace prefnav::geom {

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

struct Rect {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  [[nodiscard]] bool contains(const Vec2& p) const noexcept {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  [[nodiscard]] double width() const noexcept { return xmax - xmin; }
  [[nodiscard]] double height() const noexcept { return ymax - ymin; }
};

using Polygon = std::vector<Vec2>;

/// Even-odd rule; works for concave polygons.
[[nodiscard]] bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) noexcept;

/// Distance from p to the boundary of poly.
[[nodiscard]] double distance_to_polygon_edges(const Vec2& p, std::span<const Vec2> poly) noexcept;

class Scene {
 public:
  Scene() = default;
  Scene(std::string id, Rect bounds, std::vector<Polygon> polygons, std::vector<Circle> circles,
        Polygon spawn_region);

  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const Rect& bounds() const noexcept { return bounds_; }
  [[nodiscard]] const std::vector<Polygon>& polygons() const noexcept { return polygons_; }
  [[nodiscard]] const std::vector<Circle>& circles() const noexcept { return circles_; }
  [[nodiscard]] const Polygon& spawn_region() const noexcept { return spawn_region_; }

  /// True if p lies inside an obstacle or outside the bounds.
  [[nodiscard]] bool inside_obstacle(const Vec2& p) const noexcept;

  /// Clearance from p to the nearest obstacle or wall; 0 when inside one.
  [[nodiscard]] double clearance(const Vec2& p) const noexcept;

  /// True if a disc of `radius` centred at p touches no obstacle or wall.
  [[nodiscard]] bool disc_free(const Vec2& p, double radius) const noexcept { return clearance(p) > radius; }

  /// True if p lies in the spawn region (the whole room when none is given).
  [[nodiscard]] bool in_spawn_region(const Vec2& p) const noexcept;

  [[nodiscard]] nlohmann::json to_json() const;
  static Scene from_json(const nlohmann::json& j);
  static Scene load(const std::filesystem::path& path);

 private:
  std::string id_;
  Rect bounds_;
  std::vector<Polygon> polygons_;
  std::vector<Circle> circles_;
  Polygon spawn_region_;
};

/// Distance along a ray from `origin` (heading + angle_offset) to the first
/// wall, obstacle or extra disc, clamped to `max_range`. Returns 0 when the
/// origin lies inside an obstacle.
[[nodiscard]] double raycast(const Scene& scene, const Pose2& origin, double angle_offset, double max_range,
                             std::span<const Circle> extra_discs = {});

/// Occupancy grid with cells marked when their centre is within `inflation`
/// of an obstacle or wall.
class OccupancyGrid {
 public:
  OccupancyGrid(const Scene& scene, double cell, double inflation);

  [[nodiscard]] int cols() const noexcept { return cols_; }
  [[nodiscard]] int rows() const noexcept { return rows_; }
  [[nodiscard]] double cell() const noexcept { return cell_; }
  [[nodiscard]] bool occupied(int col, int row) const noexcept;
  [[nodiscard]] bool in_range(int col, int row) const noexcept {
    return col >= 0 && row >= 0 && col < cols_ && row < rows_;
  }
  [[nodiscard]] Vec2 center(int col, int row) const noexcept;
  /// Cell containing p (may be out of range).
  [[nodiscard]] std::pair<int, int> cell_of(const Vec2& p) const noexcept;

 private:
  Rect bounds_;
  double cell_ = 0.1;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<unsigned char> occ_;
};

struct AStarResult {
  std::vector<Vec2> path;         // smoothed polyline, start and goal exact
  std::vector<Vec2> grid_path;    // raw 8-connected cell centres
  double grid_cost = 0.0;         // cost of the raw grid path in meters
};

/// 8-connected grid A* with an octile heuristic on a grid inflated by
/// `clearance`, followed by line-of-sight corner cutting.
/// Throws Error("unreachable") when no path exists.
[[nodiscard]] AStarResult astar(const Scene& scene, const Vec2& start, const Vec2& goal, double cell = 0.1,
                                double clearance = 0.3);

[[nodiscard]] inline std::vector<Vec2> astar_path(const Scene& scene, const Vec2& start, const Vec2& goal,
                                                  double cell = 0.1, double clearance = 0.3) {
  return astar(scene, start, goal, cell, clearance).path;
}

}  // namespace prefnav::geom
