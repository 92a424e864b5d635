#include "fixtures.hpp"

#include <prefnav/error.hpp>
#include <prefnav/geom/trajectory.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <queue>

using namespace prefnav;
using namespace prefnav::geom;

namespace {

// Ray/axis-aligned-box exit distance for an origin inside the box.
double box_exit_distance(const Vec2& o, double angle, const Rect& r) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  double t = std::numeric_limits<double>::infinity();
  if (dx > 0) t = std::min(t, (r.xmax - o.x) / dx);
  if (dx < 0) t = std::min(t, (r.xmin - o.x) / dx);
  if (dy > 0) t = std::min(t, (r.ymax - o.y) / dy);
  if (dy < 0) t = std::min(t, (r.ymin - o.y) / dy);
  return t;
}

// Winding-number point-in-polygon, independent of the even-odd code under test.
bool winding_inside(const Vec2& p, const Polygon& poly) {
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const double side = (b - a).cross(p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++wn;
    } else if (b.y <= p.y && side < 0) {
      --wn;
    }
  }
  return wn != 0;
}

// Plain Dijkstra over the same inflated grid; its optimum bounds A* from below.
double dijkstra_cost(const OccupancyGrid& g, std::pair<int, int> s, std::pair<int, int> t) {
  const int C = g.cols(), R = g.rows();
  std::vector<double> dist(static_cast<std::size_t>(C * R), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  const int si = s.second * C + s.first;
  const int ti = t.second * C + t.first;
  auto open = [&](int c, int r) { return g.in_range(c, r) && (r * C + c == si || r * C + c == ti || !g.occupied(c, r)); };
  dist[static_cast<std::size_t>(si)] = 0.0;
  q.push({0.0, si});
  while (!q.empty()) {
    auto [d, i] = q.top();
    q.pop();
    if (d > dist[static_cast<std::size_t>(i)]) continue;
    const int c = i % C, r = i / C;
    if (c == t.first && r == t.second) return d;
    for (int dc = -1; dc <= 1; ++dc)
      for (int dr = -1; dr <= 1; ++dr) {
        if (!dc && !dr) continue;
        const int nc = c + dc, nr = r + dr;
        if (!open(nc, nr)) continue;
        if (dc && dr && (!open(c + dc, r) || !open(c, r + dr))) continue;
        const double nd = d + g.cell() * ((dc && dr) ? std::sqrt(2.0) : 1.0);
        const int ni = nr * C + nc;
        if (nd < dist[static_cast<std::size_t>(ni)]) {
          dist[static_cast<std::size_t>(ni)] = nd;
          q.push({nd, ni});
        }
      }
  }
  return std::numeric_limits<double>::infinity();
}

// Walks the polyline and interpolates the point at arc length s.
Vec2 point_at_arc_length(const std::vector<Vec2>& pts, double s) {
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double seg = std::hypot(pts[k].x - pts[k - 1].x, pts[k].y - pts[k - 1].y);
    if (s <= seg || k + 1 == pts.size()) {
      const double f = seg > 0 ? std::min(s / seg, 1.0) : 0.0;
      return {pts[k - 1].x + f * (pts[k].x - pts[k - 1].x), pts[k - 1].y + f * (pts[k].y - pts[k - 1].y)};
    }
    s -= seg;
  }
  return pts.back();
}

}  // namespace

TEST(Polar, OnAxisTarget) {
  const auto p = to_polar({1, 0}, Pose2(0, 0, 0));
  EXPECT_DOUBLE_EQ(p.distance, 1.0);
  EXPECT_DOUBLE_EQ(p.bearing, 0.0);
}

TEST(Polar, TargetToTheLeft) {
  const auto p = to_polar({0, 2}, Pose2(0, 0, 0));
  EXPECT_DOUBLE_EQ(p.distance, 2.0);
  EXPECT_NEAR(p.bearing, kPi / 2, 1e-15);
}

TEST(Polar, RotatedFrame) {
  const auto p = to_polar({1, 1}, Pose2(0, 0, kPi / 2));
  EXPECT_NEAR(p.distance, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p.bearing, -kPi / 4, 1e-15);
}

TEST(Polar, InverseReconstructsTarget) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 frame(uniform(rng, -10, 10), uniform(rng, -10, 10), uniform(rng, -4, 4));
    const Vec2 target{uniform(rng, -10, 10), uniform(rng, -10, 10)};
    const Vec2 back = from_polar(to_polar(target, frame), frame);
    EXPECT_NEAR(back.x, target.x, 1e-9);
    EXPECT_NEAR(back.y, target.y, 1e-9);
  }
}

TEST(Angles, NormalizedToHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(uniform(rng, -50, 50));
    EXPECT_GT(a, -kPi);
    EXPECT_LE(a, kPi);
  }
  EXPECT_EQ(Pose2(0, 0, 3 * kPi).theta, kPi);
}

TEST(Resample, UniformSubdivisionOfSegment) {
  const std::vector<Vec2> seg{{0, 0}, {4, 0}};
  const auto r = resample(Trajectory::from_points(seg), 5);
  ASSERT_EQ(r.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(r.samples()[static_cast<std::size_t>(i)].pose.x, i, 1e-12);
    EXPECT_NEAR(r.samples()[static_cast<std::size_t>(i)].pose.y, 0.0, 1e-12);
  }
}

TEST(Resample, SamplesSitAtEqualArcLengthAlongInput) {
  Rng rng(5);
  std::vector<Vec2> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({uniform(rng, 0, 5), uniform(rng, 0, 5)});
  const auto r = resample(Trajectory::from_points(pts), 100);
  double total = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) total += std::hypot(pts[k].x - pts[k - 1].x, pts[k].y - pts[k - 1].y);
  for (std::size_t i = 0; i < 100; ++i) {
    const Vec2 want = point_at_arc_length(pts, total * static_cast<double>(i) / 99.0);
    EXPECT_NEAR(r.samples()[i].pose.x, want.x, 1e-9);
    EXPECT_NEAR(r.samples()[i].pose.y, want.y, 1e-9);
  }
}

TEST(Resample, LShapeMidpointIsTheCorner) {
  const std::vector<Vec2> pts{{0, 0}, {2, 0}, {2, 2}};
  const auto r = resample(Trajectory::from_points(pts), 3);
  EXPECT_NEAR(r.samples()[1].pose.x, 2.0, 1e-12);
  EXPECT_NEAR(r.samples()[1].pose.y, 0.0, 1e-12);
}

TEST(Resample, PreservesEndpointsAndArcLength) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({uniform(rng, 0, 5), uniform(rng, 0, 5)});
    const auto in = Trajectory::from_points(pts);
    const auto out = resample(in, 37);
    EXPECT_EQ(out.front().pose.position(), in.front().pose.position());
    EXPECT_EQ(out.back().pose.position(), in.back().pose.position());
    // Chords cut corners: never longer, and converging with density.
    EXPECT_LE(out.arc_length(), in.arc_length() + 1e-9);
    EXPECT_NEAR(resample(in, 20000).arc_length(), in.arc_length(), 1e-2);
    EXPECT_DOUBLE_EQ(out.front().t, in.front().t);
    EXPECT_DOUBLE_EQ(out.back().t, in.back().t);
  }
}

TEST(Resample, DegenerateInputIsRejected) {
  const Trajectory still({{0.0, Pose2(1, 1, 0)}, {1.0, Pose2(1, 1, 0)}});
  try {
    (void)resample(still, 10);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "zero-length trajectory");
  }
}

TEST(Trajectory, RejectsNonIncreasingTimestamps) {
  EXPECT_THROW(Trajectory({{0.0, Pose2()}, {0.0, Pose2(1, 0, 0)}}), Error);
  EXPECT_THROW(Trajectory({{0.0, Pose2()}}), Error);
}

TEST(Raycast, EmptyRoomMatchesBoxIntersection) {
  const Scene room = test::empty_room(10, 10);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double a = uniform(rng, -kPi, kPi);
    const double expected = std::min(box_exit_distance({5, 5}, a, room.bounds()), 6.0);
    EXPECT_NEAR(raycast(room, Pose2(5, 5, 0), a, 6.0), expected, 1e-9);
  }
}

TEST(Raycast, PerpendicularWall) {
  const Scene s("wall", {0, 0, 10, 10}, {test::box(3, 0, 3.2, 10)}, {}, {});
  EXPECT_NEAR(raycast(s, Pose2(1, 5, 0), 0.0, 6.0), 2.0, 1e-12);
}

TEST(Raycast, DiagonalRayAgainstWall) {
  const Scene s("wall", {-1, -10, 10, 10}, {test::box(3, -10, 3.5, 10)}, {}, {});
  EXPECT_NEAR(raycast(s, Pose2(0, 0, 0), kPi / 4, 6.0), 3 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(raycast(s, Pose2(0, 0, 0), kPi / 4, 4.0), 4.0, 1e-12);
}

TEST(Raycast, MonotoneInMaxRange) {
  const Scene s = Scene::load(test::data_dir() / "scenes" / "two_rooms_a.json");
  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    const Pose2 o(uniform(rng, 0.5, 9.5), uniform(rng, 0.5, 5.5), uniform(rng, -kPi, kPi));
    const double a = uniform(rng, -kPi, kPi);
    const double r1 = uniform(rng, 0.1, 6), r2 = r1 + uniform(rng, 0, 3);
    EXPECT_LE(raycast(s, o, a, r1), raycast(s, o, a, r2) + 1e-12);
  }
}

TEST(Raycast, OriginInsideObstacleReturnsZero) {
  const Scene s("wall", {0, 0, 10, 10}, {test::box(3, 0, 4, 10)}, {}, {});
  EXPECT_EQ(raycast(s, Pose2(3.5, 5, 0), 0.0, 6.0), 0.0);
}

TEST(Raycast, ExtraDiscIsHit) {
  const Scene room = test::empty_room(10, 10);
  const std::vector<Circle> human{{{7, 5}, 0.3}};
  EXPECT_NEAR(raycast(room, Pose2(5, 5, 0), 0.0, 6.0, human), 1.7, 1e-12);
}

TEST(SceneGeometry, PointInPolygonAgreesWithWindingNumber) {
  const Polygon concave{{0, 0}, {4, 0}, {4, 4}, {2, 1.5}, {0, 4}};
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p{uniform(rng, -1, 5), uniform(rng, -1, 5)};
    EXPECT_EQ(point_in_polygon(p, concave), winding_inside(p, concave)) << p.x << ", " << p.y;
  }
}

TEST(SceneGeometry, ClearanceOfCircleAndWalls) {
  const Scene s("c", {0, 0, 10, 10}, {}, {{{5, 5}, 1.0}}, {});
  EXPECT_NEAR(s.clearance({7, 5}), 1.0, 1e-12);
  EXPECT_NEAR(s.clearance({0.5, 5}), 0.5, 1e-12);
  EXPECT_EQ(s.clearance({5, 5.5}), 0.0);
  EXPECT_TRUE(s.inside_obstacle({11, 5}));
  EXPECT_TRUE(s.disc_free({2, 2}, 0.18));
}

TEST(SceneFile, JsonRoundTripAndValidation) {
  const Scene s = Scene::load(test::data_dir() / "scenes" / "two_rooms_b.json");
  const Scene back = Scene::from_json(s.to_json());
  EXPECT_EQ(back.id(), s.id());
  EXPECT_EQ(back.polygons().size(), s.polygons().size());
  EXPECT_EQ(back.circles().size(), s.circles().size());
  nlohmann::json bad = s.to_json();
  bad["circles"].push_back({{"c", {100, 100}}, {"r", 1}});
  EXPECT_THROW((void)Scene::from_json(bad), Error);
  EXPECT_THROW((void)Scene::from_json(nlohmann::json{{"id", "x"}}), Error);
}

TEST(AStar, FreeSpaceIsStraight) {
  const Scene room = test::empty_room(5, 3);
  const auto path = astar_path(room, {1, 1}, {4, 1});
  EXPECT_NEAR(polyline_length(path), 3.0, 0.1);
  EXPECT_EQ(path.front(), (Vec2{1, 1}));
  EXPECT_EQ(path.back(), (Vec2{4, 1}));
}

TEST(AStar, PassesThroughTheGap) {
  // Wall at x in [4.9, 5.1] with a gap for y in [4, 5].
  const Scene s("gap", {0, 0, 10, 8}, {test::box(4.9, 0, 5.1, 4), test::box(4.9, 5, 5.1, 8)}, {}, {});
  const auto path = astar_path(s, {2, 1}, {8, 1});
  bool crossed_in_gap = false;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 a = path[i - 1], b = path[i];
    if ((a.x - 5) * (b.x - 5) <= 0 && a.x != b.x) {
      const double y = a.y + (b.y - a.y) * (5 - a.x) / (b.x - a.x);
      crossed_in_gap = y > 4 && y < 5;
    }
  }
  EXPECT_TRUE(crossed_in_gap);
  for (const auto& p : resample_points(path, 400)) EXPECT_GT(s.clearance(p), 0.29);
}

TEST(AStar, LengthBoundedBelowByEuclideanAndOptimalOnGrid) {
  const Scene s = Scene::load(test::data_dir() / "scenes" / "two_rooms_a.json");
  Rng rng(12);
  int solved = 0;
  for (int trial = 0; trial < 400 && solved < 100; ++trial) {
    const Vec2 a{uniform(rng, 0.5, 9.5), uniform(rng, 0.5, 5.5)};
    const Vec2 b{uniform(rng, 0.5, 9.5), uniform(rng, 0.5, 5.5)};
    AStarResult r;
    try {
      r = astar(s, a, b, 0.1, 0.3);
    } catch (const Error&) {
      continue;
    }
    ++solved;
    EXPECT_GE(polyline_length(r.path) + 1e-9, distance(a, b));
    const OccupancyGrid g(s, 0.1, 0.3);
    EXPECT_LE(r.grid_cost, dijkstra_cost(g, g.cell_of(a), g.cell_of(b)) + 1e-9);
  }
  EXPECT_EQ(solved, 100);
}

TEST(AStar, UnreachableGoal) {
  const Scene s("closed", {0, 0, 10, 8}, {test::box(4.9, 0, 5.1, 8)}, {}, {});
  try {
    (void)astar_path(s, {2, 2}, {8, 2});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "unreachable");
  }
}
