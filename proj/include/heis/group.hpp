#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace heis {

// Group element [x,y,z], identified with R^3.  Multiplication follows
// [a,b,c][x,y,z] = [x+a, y+b, z+c+a*y]; the generated vector fields
// X = d/dx + y d/dz, Y = d/dy, Z = d/dz are right-invariant, so flows along
// X and Y act by left multiplication.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Point mul(const Point& p, const Point& q) {
  return {q.x + p.x, q.y + p.y, q.z + p.z + p.x * q.y};
}

inline Point inv(const Point& p) { return {-p.x, -p.y, p.x * p.y - p.z}; }

inline Point identity_point() { return {0.0, 0.0, 0.0}; }

struct DilationFactor {
  double lambda = 1.0;
  explicit DilationFactor(double l) : lambda(l) {
    if (!(l > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  }
};

inline Point dilate(const DilationFactor& d, const Point& p) {
  return {d.lambda * p.x, d.lambda * p.y, d.lambda * d.lambda * p.z};
}

inline Point dilate(double lambda, const Point& p) {
  return dilate(DilationFactor(lambda), p);
}

enum class HorizontalDir { X, Y };

// flow(X,t,p) = [t,0,0]p, flow(Y,t,p) = [0,t,0]p, exactly.
inline Point flow(HorizontalDir w, double t, const Point& p) {
  if (w == HorizontalDir::X) return mul(Point{t, 0.0, 0.0}, p);
  return mul(Point{0.0, t, 0.0}, p);
}

// Integer lattice element; arithmetic is exact and overflow-checked.
struct LatticePoint {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;

  bool operator==(const LatticePoint&) const = default;
};

inline std::int64_t checked_add(std::int64_t u, std::int64_t v) {
  std::int64_t r;
  if (__builtin_add_overflow(u, v, &r)) throw std::overflow_error("lattice add overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t u, std::int64_t v) {
  std::int64_t r;
  if (__builtin_mul_overflow(u, v, &r)) throw std::overflow_error("lattice mul overflow");
  return r;
}

inline LatticePoint mul(const LatticePoint& p, const LatticePoint& q) {
  return {checked_add(q.a, p.a), checked_add(q.b, p.b),
          checked_add(checked_add(q.c, p.c), checked_mul(p.a, q.b))};
}

inline LatticePoint inv(const LatticePoint& p) {
  return {-p.a, -p.b, checked_add(checked_mul(p.a, p.b), -p.c)};
}

inline Point to_point(const LatticePoint& g) {
  return {static_cast<double>(g.a), static_cast<double>(g.b), static_cast<double>(g.c)};
}

}  // namespace heis
