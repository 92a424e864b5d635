#include <prefnav/error.hpp>
#include <prefnav/geom/scene.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace prefnav::geom {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double octile(int dc, int dr) {
  dc = std::abs(dc);
  dr = std::abs(dr);
  return (dc + dr) + (kSqrt2 - 2.0) * std::min(dc, dr);
}

bool segment_clear(const Scene& scene, const Vec2& a, const Vec2& b, double clearance, double step) {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = a + (static_cast<double>(i) / n) * (b - a);
    if (scene.clearance(p) <= clearance) return false;
  }
  return true;
}

}  // namespace

AStarResult astar(const Scene& scene, const Vec2& start, const Vec2& goal, double cell, double clearance) {
  if (scene.clearance(start) <= clearance || scene.clearance(goal) <= clearance)
    throw Error("unreachable: start or goal inside inflated obstacle");

  const OccupancyGrid grid(scene, cell, clearance);
  const auto [sc, sr] = grid.cell_of(start);
  const auto [gc, gr] = grid.cell_of(goal);
  if (!grid.in_range(sc, sr) || !grid.in_range(gc, gr)) throw Error("unreachable: endpoint outside scene");

  const int cols = grid.cols();
  const auto index = [cols](int c, int r) { return static_cast<std::size_t>(r) * cols + c; };
  const std::size_t n = static_cast<std::size_t>(cols) * grid.rows();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::ptrdiff_t> parent(n, -1);
  std::vector<unsigned char> closed(n, 0);

  // (f, insertion order, cell); the counter makes expansion order deterministic.
  using Entry = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::uint64_t counter = 0;
  const std::size_t s_idx = index(sc, sr);
  const std::size_t g_idx = index(gc, gr);
  g[s_idx] = 0.0;
  open.emplace(octile(gc - sc, gr - sr) * cell, counter++, s_idx);

  const auto passable = [&](int c, int r) {
    if (!grid.in_range(c, r)) return false;
    const std::size_t i = index(c, r);
    return i == s_idx || i == g_idx || !grid.occupied(c, r);
  };

  while (!open.empty()) {
    const auto [f, order, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == g_idx) break;
    const int cc = static_cast<int>(cur % cols);
    const int cr = static_cast<int>(cur / cols);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dc == 0 && dr == 0) continue;
        const int nc = cc + dc, nr = cr + dr;
        if (!passable(nc, nr)) continue;
        // No squeezing diagonally between two blocked cells.
        if (dc != 0 && dr != 0 && (!passable(cc + dc, cr) || !passable(cc, cr + dr))) continue;
        const std::size_t ni = index(nc, nr);
        if (closed[ni]) continue;
        const double ng = g[cur] + ((dc != 0 && dr != 0) ? kSqrt2 : 1.0) * cell;
        if (ng < g[ni]) {
          g[ni] = ng;
          parent[ni] = static_cast<std::ptrdiff_t>(cur);
          open.emplace(ng + octile(gc - nc, gr - nr) * cell, counter++, ni);
        }
      }
    }
  }
  if (!closed[g_idx]) throw Error("unreachable");

  AStarResult res;
  res.grid_cost = g[g_idx];
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(g_idx); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    const auto u = static_cast<std::size_t>(i);
    res.grid_path.push_back(grid.center(static_cast<int>(u % cols), static_cast<int>(u / cols)));
  }
  std::reverse(res.grid_path.begin(), res.grid_path.end());

  // Corner cutting: greedily connect to the farthest visible waypoint.
  std::vector<Vec2> way;
  way.push_back(start);
  for (std::size_t i = 1; i + 1 < res.grid_path.size(); ++i) way.push_back(res.grid_path[i]);
  way.push_back(goal);
  const double step = cell * 0.25;
  res.path.push_back(start);
  std::size_t anchor = 0;
  while (anchor + 1 < way.size()) {
    std::size_t next = anchor + 1;
    for (std::size_t j = way.size() - 1; j > anchor + 1; --j) {
      if (segment_clear(scene, way[anchor], way[j], clearance, step)) {
        next = j;
        break;
      }
    }
    res.path.push_back(way[next]);
    anchor = next;
  }
  return res;
}

}  // namespace prefnav::geom
