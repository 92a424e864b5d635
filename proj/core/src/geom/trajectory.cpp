#include <prefnav/geom/trajectory.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace prefnav::geom {
namespace {

bool finite(const TimedPose& s) {
  return std::isfinite(s.t) && std::isfinite(s.pose.x) && std::isfinite(s.pose.y) &&
         std::isfinite(s.pose.theta);
}

double lerp_angle(double a, double b, double u) { return normalize_angle(a + u * normalize_angle(b - a)); }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  double u = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return distance(p, a + u * ab);
}

// Uniform Catmull-Rom through the vertices, densely tabulated.
std::vector<TimedPose> catmull_rom_dense(const std::vector<TimedPose>& in, int per_segment) {
  std::vector<TimedPose> out;
  const std::size_t n = in.size();
  auto p = [&](std::ptrdiff_t i) {
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1);
    return in[static_cast<std::size_t>(i)];
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto i0 = static_cast<std::ptrdiff_t>(i);
    const Vec2 p0 = p(i0 - 1).pose.position(), p1 = p(i0).pose.position();
    const Vec2 p2 = p(i0 + 1).pose.position(), p3 = p(i0 + 2).pose.position();
    for (int k = 0; k < per_segment; ++k) {
      const double u = static_cast<double>(k) / per_segment;
      const double u2 = u * u, u3 = u2 * u;
      const Vec2 q = 0.5 * ((2.0 * p1) + (p2 - p0) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                            (3.0 * p1 - p0 - 3.0 * p2 + p3) * u3);
      const double t = in[i].t + u * (in[i + 1].t - in[i].t);
      out.push_back({t, Pose2(q, lerp_angle(in[i].pose.theta, in[i + 1].pose.theta, u))});
    }
  }
  out.push_back(in.back());
  return out;
}

std::vector<TimedPose> resample_linear(const std::vector<TimedPose>& in, std::size_t n) {
  std::vector<Vec2> pts;
  pts.reserve(in.size());
  for (const auto& s : in) pts.push_back(s.pose.position());
  const std::vector<double> cum = cumulative_length(pts);
  const double total = cum.back();
  if (!(total > 0.0)) throw Error("zero-length trajectory");

  std::vector<TimedPose> out;
  out.reserve(n);
  out.push_back(in.front());
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < cum.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    const TimedPose& a = in[seg];
    const TimedPose& b = in[seg + 1];
    const Vec2 q = a.pose.position() + u * (b.pose.position() - a.pose.position());
    out.push_back({a.t + u * (b.t - a.t), Pose2(q, lerp_angle(a.pose.theta, b.pose.theta, u))});
  }
  out.push_back(in.back());
  return out;
}

}  // namespace

Trajectory::Trajectory(std::vector<TimedPose> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw Error("trajectory needs at least 2 samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!finite(samples_[i])) throw Error("trajectory sample " + std::to_string(i) + " is not finite");
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t))
      throw Error("trajectory timestamps must be strictly increasing (sample " + std::to_string(i) + ")");
  }
}

Trajectory Trajectory::from_points(std::span<const Vec2> points, double speed) {
  if (points.size() < 2) throw Error("trajectory needs at least 2 samples");
  if (!(speed > 0.0)) throw Error("speed must be positive");
  std::vector<TimedPose> s;
  s.reserve(points.size());
  double t = 0.0;
  double heading = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i + 1 < points.size()) {
      const Vec2 d = points[i + 1] - points[i];
      if (d.norm() > 0.0) heading = std::atan2(d.y, d.x);
    }
    if (i > 0) {
      const double step = distance(points[i], points[i - 1]);
      // Repeated points still need a strictly increasing clock.
      t += step > 0.0 ? step / speed : 1e-6;
    }
    s.push_back({t, Pose2(points[i], heading)});
  }
  return Trajectory(std::move(s));
}

std::vector<Vec2> Trajectory::points() const {
  std::vector<Vec2> pts;
  pts.reserve(samples_.size());
  for (const auto& s : samples_) pts.push_back(s.pose.position());
  return pts;
}

double Trajectory::arc_length() const {
  const auto pts = points();
  return polyline_length(pts);
}

Pose2 Trajectory::at_time(double t) const {
  if (t <= samples_.front().t) return samples_.front().pose;
  if (t >= samples_.back().t) return samples_.back().pose;
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const TimedPose& s) { return v < s.t; });
  const TimedPose& b = *it;
  const TimedPose& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  const Vec2 q = a.pose.position() + u * (b.pose.position() - a.pose.position());
  return Pose2(q, lerp_angle(a.pose.theta, b.pose.theta, u));
}

Trajectory Trajectory::reversed() const {
  std::vector<TimedPose> r;
  r.reserve(samples_.size());
  const double t_end = samples_.back().t;
  for (auto it = samples_.rbegin(); it != samples_.rend(); ++it)
    r.push_back({t_end - it->t, Pose2(it->pose.x, it->pose.y, it->pose.theta + kPi)});
  return Trajectory(std::move(r));
}

Trajectory resample(const Trajectory& traj, std::size_t n, Interpolation interp) {
  if (n < 2) throw Error("resample needs n >= 2");
  if (interp == Interpolation::kLinear) return Trajectory(resample_linear(traj.samples(), n));
  if (!(traj.arc_length() > 0.0)) throw Error("zero-length trajectory");
  return Trajectory(resample_linear(catmull_rom_dense(traj.samples(), 16), n));
}

double polyline_length(std::span<const Vec2> pts) noexcept {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i], pts[i - 1]);
  return len;
}

std::vector<double> cumulative_length(std::span<const Vec2> pts) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + distance(pts[i], pts[i - 1]);
  return cum;
}

std::vector<Vec2> resample_points(std::span<const Vec2> pts, std::size_t n) {
  if (pts.empty()) throw Error("empty polyline");
  if (n < 2) throw Error("resample needs n >= 2");
  if (pts.size() == 1) throw Error("zero-length trajectory");
  std::vector<TimedPose> in;
  in.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) in.push_back({static_cast<double>(i), Pose2(pts[i], 0.0)});
  const auto out = resample_linear(in, n);
  std::vector<Vec2> res;
  res.reserve(out.size());
  for (const auto& s : out) res.push_back(s.pose.position());
  return res;
}

double distance_to_polyline(const Vec2& p, std::span<const Vec2> pts) noexcept {
  if (pts.empty()) return 0.0;
  if (pts.size() == 1) return distance(p, pts[0]);
  double best = segment_distance(p, pts[0], pts[1]);
  for (std::size_t i = 2; i < pts.size(); ++i) best = std::min(best, segment_distance(p, pts[i - 1], pts[i]));
  return best;
}

}  // namespace prefnav::geom
