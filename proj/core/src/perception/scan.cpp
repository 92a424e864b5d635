#include <prefnav/perception/scan.hpp>

#include <prefnav/error.hpp>

#include <array>

namespace prefnav::perception {

double ray_offset(int i, int count, double fov) noexcept {
  if (count <= 1) return 0.0;
  return 0.5 * fov - fov * static_cast<double>(i) / static_cast<double>(count - 1);
}

DepthScan render_scan(const geom::Scene& scene, const Pose2& robot, const std::optional<Pose2>& human, double fov,
                      int rays, double max_range, double human_radius) {
  if (rays <= 0) throw Error("render_scan: ray count must be positive");
  DepthScan scan;
  scan.fov = fov;
  scan.max_range = max_range;
  scan.rays.resize(rays);
  std::array<geom::Circle, 1> disc{};
  std::span<const geom::Circle> extra;
  if (human) {
    disc[0] = {human->position(), human_radius};
    extra = disc;
  }
  for (int i = 0; i < rays; ++i)
    scan.rays[i] = geom::raycast(scene, robot, ray_offset(i, rays, fov), max_range, extra) / max_range;
  return scan;
}

DepthScan corrupt(const DepthScan& scan, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("corrupt: p must lie in [0, 1]");
  DepthScan out = scan;
  std::bernoulli_distribution drop(p);
  for (Eigen::Index i = 0; i < out.rays.size(); ++i)
    if (drop(rng)) out.rays[i] = 0.0;
  return out;
}

}  // namespace prefnav::perception
