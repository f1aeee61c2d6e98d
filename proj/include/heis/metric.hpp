#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "heis/group.hpp"

namespace heis {

enum class MetricKind { Word, Gauge, SubRiemannian, CCL1 };

// Homogeneous quasi-norm max(|x|, |y|, |z|^(1/2)); degree 1 under dilations.
inline double gauge(const Point& p) {
  double g = std::abs(p.x);
  g = std::max(g, std::abs(p.y));
  g = std::max(g, std::sqrt(std::abs(p.z)));
  return g;
}

inline double snowflake(double dist, double eps) {
  if (dist < 0.0) throw std::invalid_argument("snowflake: negative distance");
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("snowflake: eps outside (0,1/2]");
  return std::pow(dist, 1.0 - eps);
}

// Exact word distances on the lattice ball of radius R, four generators
// [+-1,0,0],[0,+-1,0], BFS over left multiplication (paths of flow moves).
struct BallTable {
  int radius = 0;
  // packed key -> index; entries sorted by packed key, distance alongside
  std::vector<std::int64_t> keys;
  std::vector<std::int32_t> dists;
  std::vector<LatticePoint> points;  // same order as keys

  std::optional<int> distance(const LatticePoint& g) const;
  std::size_t size() const { return keys.size(); }
};

// Node-count guard: ball size grows like R^4 (homogeneous dimension).
BallTable word_ball(int radius, std::size_t node_cap = 50'000'000);

std::int64_t pack_lattice(const LatticePoint& g);

struct CcOptions {
  double tol = 1e-10;          // root-finder tolerance on the twist parameter
  double straight_z = 1e-12;   // degenerate straight-line branch threshold
};

// Carnot-Caratheodory distance.  SubRiemannian solves the circular-arc
// geodesic family (l2 horizontal norm); CCL1 is the Sum|t_i| infimum over
// piecewise-horizontal paths, computed on a reduced staircase family.
double cc_distance(const Point& p, const Point& q, MetricKind kind,
                   const CcOptions& opt = {});

double word_distance(const BallTable& table, const LatticePoint& p, const LatticePoint& q);

}  // namespace heis
