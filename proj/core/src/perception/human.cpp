#include <prefnav/perception/human.hpp>

#include <cmath>

namespace prefnav::perception {

HumanObservation detect_human(const geom::Scene& scene, const geom::Pose2& robot,
                              const std::optional<geom::Pose2>& human, double fov, double max_range) {
  if (!human) return HumanObservation::none();
  const auto ref = geom::to_polar(human->position(), robot);
  if (std::abs(ref.bearing) > 0.5 * fov || ref.distance > max_range) return HumanObservation::none();
  const double free = geom::raycast(scene, robot, ref.bearing, std::max(ref.distance, 1e-9));
  if (free < ref.distance - 1e-9) return HumanObservation::none();
  return {1, ref.distance, ref.bearing};
}

}  // namespace prefnav::perception
