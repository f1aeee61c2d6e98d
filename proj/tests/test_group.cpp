#include <random>

#include "doctest.h"
#include "heis/group.hpp"

using namespace heis;

namespace {
Point random_point(std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}
double coord_mag(const Point& p) {
  return std::abs(p.x) + std::abs(p.y) + std::abs(p.z);
}
double max_coord_diff(const Point& a, const Point& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}
}  // namespace

TEST_CASE("group law on stated examples") {
  Point r = mul(Point{1, 0, 0}, Point{0, 1, 0});
  CHECK(r.x == 1.0);
  CHECK(r.y == 1.0);
  CHECK(r.z == 1.0);

  std::mt19937_64 rng(1);
  Point p = random_point(rng);
  Point q = mul(identity_point(), p);
  CHECK(max_coord_diff(p, q) == 0.0);

  // commutator word, evaluated step by step
  Point c = mul(mul(mul(Point{1, 0, 0}, Point{0, 1, 0}), Point{-1, 0, 0}), Point{0, -1, 0});
  CHECK(c.x == doctest::Approx(0.0));
  CHECK(c.y == doctest::Approx(0.0));
  CHECK(c.z == doctest::Approx(1.0));
}

TEST_CASE("inverse") {
  Point z = inv(identity_point());
  CHECK(coord_mag(z) == 0.0);
  Point e1 = inv(Point{1, 0, 0});
  CHECK(e1.x == -1.0);

  Point p{1, 1, 1};
  Point pi = inv(p);
  CHECK(pi.x == -1.0);
  CHECK(pi.y == -1.0);
  CHECK(pi.z == 0.0);
  CHECK(coord_mag(mul(p, pi)) == 0.0);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    Point q = random_point(rng);
    CHECK(coord_mag(mul(q, inv(q))) <= 1e-12 * (1.0 + coord_mag(q)));
  }
}

TEST_CASE("associativity over random triples") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    Point p = random_point(rng), q = random_point(rng), r = random_point(rng);
    Point lhs = mul(mul(p, q), r);
    Point rhs = mul(p, mul(q, r));
    double mags = 1.0 + coord_mag(p) + coord_mag(q) + coord_mag(r);
    CHECK(max_coord_diff(lhs, rhs) <= 1e-12 * mags);
  }
}

TEST_CASE("dilations") {
  Point d = dilate(2.0, {1, 1, 1});
  CHECK(d.x == 2.0);
  CHECK(d.y == 2.0);
  CHECK(d.z == 4.0);

  std::mt19937_64 rng(4);
  Point p = random_point(rng);
  CHECK(max_coord_diff(dilate(1.0, p), p) == 0.0);

  CHECK_THROWS_AS(dilate(0.0, p), std::invalid_argument);
  CHECK_THROWS_AS(dilate(-2.0, p), std::invalid_argument);

  std::uniform_real_distribution<double> ul(0.1, 4.0);
  for (int i = 0; i < 100; ++i) {
    double lam = ul(rng);
    Point a = random_point(rng), b = random_point(rng);
    Point lhs = dilate(lam, mul(a, b));
    Point rhs = mul(dilate(lam, a), dilate(lam, b));
    CHECK(max_coord_diff(lhs, rhs) <=
          1e-12 * (1.0 + coord_mag(lhs) + coord_mag(rhs)));
    // compose(delta_l, delta_m) = delta_{lm}
    Point two = dilate(lam, dilate(2.0, a));
    Point one = dilate(2.0 * lam, a);
    CHECK(max_coord_diff(two, one) <= 1e-12 * (1.0 + coord_mag(one)));
  }
}

TEST_CASE("flows match left translation exactly") {
  Point a = flow(HorizontalDir::X, 1.0, identity_point());
  CHECK(a.x == 1.0);
  CHECK(a.y == 0.0);
  CHECK(a.z == 0.0);

  double t = 0.7, s = -1.3, u = 2.1;
  Point b = flow(HorizontalDir::Y, s, flow(HorizontalDir::X, t, identity_point()));
  CHECK(b.x == t);
  CHECK(b.y == s);
  CHECK(b.z == 0.0);

  // flow(X,u,[t,s,0]) = [t+u, s, u*s], the integrated dx=1, dz=y path
  Point c = flow(HorizontalDir::X, u, {t, s, 0});
  CHECK(c.x == doctest::Approx(t + u));
  CHECK(c.y == doctest::Approx(s));
  CHECK(c.z == doctest::Approx(u * s));
  Point c2 = mul(Point{u, 0, 0}, Point{t, s, 0});
  CHECK(max_coord_diff(c, c2) == 0.0);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Point p = random_point(rng);
    double w = std::uniform_real_distribution<double>(-3, 3)(rng);
    CHECK(max_coord_diff(flow(HorizontalDir::X, w, p), mul(Point{w, 0, 0}, p)) == 0.0);
    CHECK(max_coord_diff(flow(HorizontalDir::Y, w, p), mul(Point{0, w, 0}, p)) == 0.0);
  }
}

TEST_CASE("lattice arithmetic is exact and closed") {
  LatticePoint g{3, -2, 5}, h{-1, 4, -7};
  LatticePoint gh = mul(g, h);
  CHECK(gh.a == 2);
  CHECK(gh.b == 2);
  CHECK(gh.c == 5 - 7 + 3 * 4);
  LatticePoint gi = inv(g);
  LatticePoint e = mul(g, gi);
  CHECK(e == LatticePoint{0, 0, 0});

  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::int64_t> ui(-1000, 1000);
  for (int i = 0; i < 500; ++i) {
    LatticePoint u{ui(rng), ui(rng), ui(rng)}, v{ui(rng), ui(rng), ui(rng)};
    CHECK(mul(mul(u, v), inv(v)) == u);
  }
}

TEST_CASE("lattice overflow is detected") {
  std::int64_t big = std::int64_t(1) << 62;
  LatticePoint u{big, big, 0};
  CHECK_THROWS_AS(mul(u, u), std::overflow_error);
}
