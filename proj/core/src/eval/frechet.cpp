#include <prefnav/eval/frechet.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace prefnav::eval {

Eigen::MatrixXd coupling_table(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw Error("frechet: empty polyline");
  const auto n = static_cast<Eigen::Index>(a.size());
  const auto m = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd d(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = geom::distance(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
      if (i == 0 && j == 0) {
        d(i, j) = c;
      } else if (i == 0) {
        d(i, j) = std::max(c, d(i, j - 1));
      } else if (j == 0) {
        d(i, j) = std::max(c, d(i - 1, j));
      } else {
        d(i, j) = std::max(c, std::min({d(i - 1, j), d(i, j - 1), d(i - 1, j - 1)}));
      }
    }
  }
  return d;
}

namespace {

std::vector<Vec2> prepare(std::span<const Vec2> pts, std::size_t resample) {
  if (pts.empty()) throw Error("frechet: empty polyline");
  if (resample == 0) return {pts.begin(), pts.end()};
  return geom::resample_points(pts, resample);
}

}  // namespace

double discrete_frechet(std::span<const Vec2> a, std::span<const Vec2> b, std::size_t resample) {
  const auto ra = prepare(a, resample);
  const auto rb = prepare(b, resample);
  const Eigen::MatrixXd d = coupling_table(ra, rb);
  return d(d.rows() - 1, d.cols() - 1);
}

FrechetCurve partial_frechet_curve(std::span<const Vec2> a, std::span<const Vec2> b, std::size_t resample) {
  const auto ra = prepare(a, resample);
  const auto rb = prepare(b, resample);
  const Eigen::MatrixXd d = coupling_table(ra, rb);
  const auto n = static_cast<std::size_t>(d.rows());
  FrechetCurve c;
  c.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.f[i] = d.row(static_cast<Eigen::Index>(i)).minCoeff();
  c.f_open_end = c.f.back();
  c.f.back() = d(d.rows() - 1, d.cols() - 1);

  c.t.resize(n);
  const auto cum = geom::cumulative_length(ra);
  const double total = cum.back();
  for (std::size_t i = 0; i < n; ++i)
    c.t[i] = total > 0.0 ? cum[i] / total : (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 1.0);
  c.t.back() = 1.0;
  return c;
}

std::vector<double> FrechetCurve::open_ended() const {
  std::vector<double> out = f;
  if (!out.empty() && !std::isnan(f_open_end)) out.back() = f_open_end;
  return out;
}

std::size_t deviation_index(const FrechetCurve& curve, double phi) {
  if (curve.f.empty() || curve.f.size() != curve.t.size()) throw Error("deviation_point: malformed curve");
  const std::vector<double> f = curve.open_ended();
  const double fmax = *std::max_element(f.begin(), f.end());
  if (!(fmax > 0.0)) return f.size() - 1;
  const double c = std::cos(phi), s = std::sin(phi);
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double cost = c * curve.t[i] + s * (f[i] / fmax);
    if (cost <= best_cost + 1e-12) {
      best_cost = std::min(cost, best_cost);
      best = i;
    }
  }
  return best;
}

double deviation_point(const FrechetCurve& curve, double phi) { return curve.t[deviation_index(curve, phi)]; }

std::string to_string(EndpointMode m) {
  switch (m) {
    case EndpointMode::kAuto: return "auto";
    case EndpointMode::kForward: return "forward";
    case EndpointMode::kReversed: return "reversed";
  }
  return "auto";
}

EndpointMode endpoint_mode_from_string(const std::string& s) {
  if (s == "auto") return EndpointMode::kAuto;
  if (s == "forward") return EndpointMode::kForward;
  if (s == "reversed") return EndpointMode::kReversed;
  throw Error("unknown endpoint mode '" + s + "'");
}

nlohmann::json FrechetReport::to_json() const {
  return {{"F_full", F_full},
          {"t_star", t_star},
          {"f_at_t_star", f_at_t_star},
          {"reversed", reversed},
          {"curve", {{"t", curve.t}, {"f", curve.f}, {"f_open_end", curve.f_open_end}}}};
}

std::string FrechetReport::curve_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,f\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) os << curve.t[i] << ',' << curve.f[i] << '\n';
  return os.str();
}

FrechetReport deviation_aware_frechet(std::span<const Vec2> a, std::span<const Vec2> b, EndpointMode mode,
                                      std::size_t resample, double phi) {
  const auto degenerate = [](std::span<const Vec2> p) {
    return p.size() < 2 || geom::polyline_length(p) <= 0.0;
  };
  if (degenerate(a) || degenerate(b)) throw Error("deviation-aware frechet: degenerate trajectory");

  FrechetReport r;
  r.reversed = mode == EndpointMode::kReversed ||
               (mode == EndpointMode::kAuto &&
                geom::distance(a.back(), b.back()) < geom::distance(a.front(), b.front()));
  std::vector<Vec2> ra(a.begin(), a.end()), rb(b.begin(), b.end());
  if (r.reversed) {
    std::reverse(ra.begin(), ra.end());
    std::reverse(rb.begin(), rb.end());
  }
  r.curve = partial_frechet_curve(ra, rb, resample);
  r.F_full = r.curve.f.back();
  const std::size_t k = deviation_index(r.curve, phi);
  r.t_star = r.curve.t[k];
  r.f_at_t_star = r.curve.open_ended()[k];
  return r;
}

}  // namespace prefnav::eval
