#pragma once

#include <prefnav/geom/scene.hpp>
#include <prefnav/sim/world.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <limits>

namespace prefnav::test {

inline std::filesystem::path data_dir() { return PREFNAV_TEST_DATA_DIR; }

/// Rectangular room without obstacles.
inline geom::Scene empty_room(double w, double h, const std::string& id = "empty") {
  return geom::Scene(id, {0.0, 0.0, w, h}, {}, {}, {});
}

/// Axis-aligned box polygon.
inline geom::Polygon box(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Observer exposing (x, y, theta, goal distance, goal bearing) so tests can
/// drive episodes without trained models.
class PoseObserver : public sim::StateObserver {
 public:
  void reset(std::uint64_t seed) override { last_seed = seed; }
  sim::Observation observe(const sim::WorldView& v) override {
    const auto g = geom::to_polar(v.goal, v.robot);
    Eigen::VectorXd s(5);
    s << v.robot.x, v.robot.y, v.robot.theta, g.distance, g.bearing;
    return {s, false};
  }
  [[nodiscard]] std::size_t state_dim() const override { return 5; }
  std::uint64_t last_seed = 0;
};

/// Drives toward the goal bearing of a PoseObserver state.
inline sim::Action steer_to_goal(const Eigen::VectorXd& s) {
  const double bearing = s[4];
  return sim::Action(std::abs(bearing) < 0.5 ? 0.5 : 0.1, 2.0 * bearing);
}

/// Central-difference derivative of f at x.
inline double numeric_derivative(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace prefnav::test
