#include "heis/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heis {

std::int64_t pack_lattice(const LatticePoint& g) {
  // |a|,|b| <= 2^19, |c| <= 2^23 covers balls far beyond the node cap
  auto enc = [](std::int64_t v, int bits) -> std::uint64_t {
    std::int64_t lim = std::int64_t(1) << bits;
    if (v <= -lim || v >= lim) throw std::overflow_error("pack_lattice: coordinate too large");
    return static_cast<std::uint64_t>(v + lim);
  };
  return static_cast<std::int64_t>((enc(g.a, 19) << 45) | (enc(g.b, 19) << 25) | enc(g.c, 23));
}

std::optional<int> BallTable::distance(const LatticePoint& g) const {
  std::int64_t k = pack_lattice(g);
  auto it = std::lower_bound(keys.begin(), keys.end(), k);
  if (it == keys.end() || *it != k) return std::nullopt;
  return dists[static_cast<std::size_t>(it - keys.begin())];
}

double word_distance(const BallTable& table, const LatticePoint& p, const LatticePoint& q) {
  auto d = table.distance(mul(q, inv(p)));
  if (!d) throw std::runtime_error("word_distance: offset outside tabulated ball");
  return static_cast<double>(*d);
}

BallTable word_ball(int radius, std::size_t node_cap) {
  if (radius < 1) throw std::invalid_argument("word_ball: radius must be >= 1");
  // Theta(R^4) estimate before allocating anything.
  double est = 0.25 * std::pow(static_cast<double>(radius) + 1.0, 4.0);
  if (est > static_cast<double>(node_cap))
    throw std::runtime_error("word_ball: estimated node count " + std::to_string(est) +
                             " exceeds cap " + std::to_string(node_cap));

  const LatticePoint gens[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};

  struct Entry {
    std::int64_t key;
    LatticePoint pt;
  };

  BallTable out;
  out.radius = radius;

  std::vector<Entry> prev;                    // layer k-1 (sorted)
  std::vector<Entry> cur{{pack_lattice({0, 0, 0}), {0, 0, 0}}};  // layer k
  out.keys.push_back(cur[0].key);
  out.dists.push_back(0);
  out.points.push_back(cur[0].pt);

  for (int layer = 1; layer <= radius; ++layer) {
    std::vector<Entry> cand;
    cand.reserve(cur.size() * 4);
    for (const Entry& e : cur)
      for (const LatticePoint& g : gens) {
        LatticePoint n = mul(g, e.pt);
        cand.push_back({pack_lattice(n), n});
      }
    std::sort(cand.begin(), cand.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
    // Generator moves flip the parity of a+b, so collisions with earlier
    // layers can only occur two layers back.
    std::vector<Entry> next;
    next.reserve(cand.size());
    std::size_t ip = 0;
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (const Entry& e : cand) {
      if (e.key == last) continue;
      last = e.key;
      while (ip < prev.size() && prev[ip].key < e.key) ++ip;
      if (ip < prev.size() && prev[ip].key == e.key) continue;
      next.push_back(e);
    }
    if (out.keys.size() + next.size() > node_cap)
      throw std::runtime_error("word_ball: node cap exceeded during BFS");
    for (const Entry& e : next) {
      out.keys.push_back(e.key);
      out.dists.push_back(layer);
      out.points.push_back(e.pt);
    }
    prev = std::move(cur);
    cur = std::move(next);
  }

  // sort the full table by key for lookups
  std::vector<std::size_t> order(out.keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return out.keys[i] < out.keys[j]; });
  BallTable sorted;
  sorted.radius = radius;
  sorted.keys.reserve(order.size());
  sorted.dists.reserve(order.size());
  sorted.points.reserve(order.size());
  for (std::size_t i : order) {
    sorted.keys.push_back(out.keys[i]);
    sorted.dists.push_back(out.dists[i]);
    sorted.points.push_back(out.points[i]);
  }
  return sorted;
}

namespace {

// ---- l2 sub-Riemannian geodesics -------------------------------------
//
// A horizontal path projects to a planar curve with dz = y dx, so the
// distance to [x,y,z] is the shortest planar curve from (0,0) to (x,y)
// whose "excess area" relative to the chord is S = z - xy/2.  Optimal
// curves are circular arcs; with half-angle t the arc of chord c has
// excess area ratio g(t) = (t - sin t cos t) / (4 sin^2 t), strictly
// increasing from 0 to infinity on (0,pi).
double arc_area_ratio(double t) {
  double s = std::sin(t);
  return (t - s * std::cos(t)) / (4.0 * s * s);
}

double solve_arc_angle(double ratio, double tol) {
  double lo = 1e-12, hi = M_PI - 1e-12;
  if (ratio <= arc_area_ratio(lo)) return lo;
  while (arc_area_ratio(hi) < ratio) {
    hi = M_PI - 0.5 * (M_PI - hi) * 1e-3;  // push toward pi
    if (M_PI - hi < 1e-300) return hi;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (arc_area_ratio(mid) < ratio)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < tol * std::max(1.0, lo)) break;
  }
  // Newton polish
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    double s = std::sin(t), cth = std::cos(t);
    double f = (t - s * cth) - ratio * 4.0 * s * s;
    double df = (1.0 - cth * cth + s * s) - ratio * 8.0 * s * cth;
    if (df == 0.0) break;
    double step = f / df;
    double tn = t - step;
    if (tn <= 0.0 || tn >= M_PI) break;
    t = tn;
    if (std::abs(step) < tol * std::max(1.0, t)) break;
  }
  return t;
}

double cc_l2(const Point& w, const CcOptions& opt) {
  double c = std::hypot(w.x, w.y);
  double S = std::abs(w.z - 0.5 * w.x * w.y);
  if (c == 0.0 && S == 0.0) return 0.0;
  // normalize to gauge ~ 1 so the straight-line threshold is scale-free
  double scale = std::max(c, std::sqrt(S));
  double cn = c / scale;
  double Sn = S / (scale * scale);
  if (Sn <= opt.straight_z) return c;
  if (cn <= opt.straight_z) return 2.0 * std::sqrt(M_PI * S);
  double t = solve_arc_angle(Sn / (cn * cn), opt.tol);
  return scale * cn * t / std::sin(t);
}

// ---- l1 CC distance ---------------------------------------------------
//
// Canonical reduction by isometries fixing the origin:
//   s1 : (x,y,z) -> (-x, y, -z)
//   s2 : (x,y,z) -> (x, -y, z - xy)
//   tau: (x,y,z) -> (y, x, xy - z)
// reaches x,y >= 0 and excess S = z - xy/2 >= 0.  There:
//   * 0 <= z <= xy: a monotone staircase works, cost x+y.
//   * z > xy: optimal paths wrap over the top along axis-aligned detours;
//     minimizing over the two staircase families below matches the
//     bang-bang structure of the l1 Dido problem.
struct Canon {
  double x, y, z;
};

Canon canonicalize(Point w) {
  for (int it = 0; it < 16; ++it) {
    if (w.x < 0.0) {
      w = {-w.x, w.y, -w.z};
      continue;
    }
    if (w.y < 0.0) {
      w = {w.x, -w.y, w.z - w.x * w.y};
      continue;
    }
    if (w.z < 0.5 * w.x * w.y) {
      w = {w.y, w.x, w.x * w.y - w.z};
      continue;
    }
    break;
  }
  return {w.x, w.y, w.z};
}

double cc_l1(const Point& w0) {
  Canon w = canonicalize(w0);
  double x = w.x, y = w.y, z = w.z;
  if (z <= x * y) return x + y;  // slack region (z >= xy/2 >= 0 after canon)

  double E = z - x * y;
  double best = std::numeric_limits<double>::infinity();
  // family A: detour rectangle above the far corner, h = w = sqrt(E)
  if (std::sqrt(E) >= x) best = std::min(best, y - x + 4.0 * std::sqrt(E));
  // family B: wrap left and over the top; u = y + h in [y, z/x]
  double u = std::sqrt(z);
  double u_hi = (x > 0.0) ? z / x : std::numeric_limits<double>::infinity();
  u = std::clamp(u, y, u_hi);
  if (u > 0.0) best = std::min(best, -x - y + 2.0 * (u + z / u));
  return best;
}

}  // namespace

double cc_distance(const Point& p, const Point& q, MetricKind kind, const CcOptions& opt) {
  Point w = mul(q, inv(p));  // right-invariance: d(p,q) = d(0, q p^{-1})
  switch (kind) {
    case MetricKind::SubRiemannian:
      return cc_l2(w, opt);
    case MetricKind::CCL1:
      return cc_l1(w);
    case MetricKind::Gauge:
      return gauge(w);
    case MetricKind::Word:
      throw std::invalid_argument("cc_distance: Word kind needs a BallTable, use word_distance");
  }
  throw std::logic_error("cc_distance: bad kind");
}

}  // namespace heis
