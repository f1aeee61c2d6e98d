#include <cmath>

#include "doctest.h"
#include "heis/deriv.hpp"
#include "heis/mollifier.hpp"

using namespace heis;

namespace {

GridSpec spec3(int nx, int ny, int nz, double h) {
  GridSpec s;
  s.h = h;
  s.nx = nx;
  s.ny = ny;
  s.nz = nz;
  return s;
}

AnalyticField planar_wave(double k) {
  AnalyticField f;
  f.dim = 1;
  f.value = [k](const Point& p, double* o) { o[0] = std::sin(k * p.x) * std::cos(k * p.y); };
  return f;
}

}  // namespace

TEST_CASE("kernel profile has unit Haar mass under quadrature") {
  MollifierFamily fam;
  CHECK(std::abs(fam.haar_mass(64) - 1.0) <= 1e-8);
}

TEST_CASE("low pass preserves constants exactly") {
  MollifierFamily fam;
  AnalyticField f;
  f.dim = 2;
  f.value = [](const Point&, double* o) {
    o[0] = 2.5;
    o[1] = -1.25;
  };
  GridField g = sample(f, spec3(33, 33, 33, 0.05));
  for (auto policy : {BoundaryPolicy::Clamp, BoundaryPolicy::Shrink}) {
    GridField lp = project(g, fam, BandKind::LowPass, 8.0, {policy, true});
    double worst = 0.0;
    for (int ix = lp.margin[0]; ix < lp.spec.nx - lp.margin[0]; ++ix)
      for (int iy = lp.margin[1]; iy < lp.spec.ny - lp.margin[1]; ++iy)
        for (int iz = lp.margin[2]; iz < lp.spec.nz - lp.margin[2]; ++iz) {
          worst = std::max(worst, std::abs(lp.at(ix, iy, iz)[0] - 2.5));
          worst = std::max(worst, std::abs(lp.at(ix, iy, iz)[1] + 1.25));
        }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("scaling property is exact for dyadic dilation") {
  MollifierFamily fam;
  AnalyticField f;
  f.dim = 1;
  f.value = [](const Point& p, double* o) {
    o[0] = std::sin(3.0 * p.x) + std::cos(2.0 * p.y) + std::sin(5.0 * p.z + 0.3);
  };
  double lam = 2.0;
  AnalyticField fd;
  fd.dim = 1;
  fd.value = [f, lam](const Point& p, double* o) { f.value(dilate(lam, p), o); };

  double N = 8.0;
  GridField gd = sample(fd, spec3(17, 17, 17, 0.05));      // f o delta_2 on spacing h
  GridField g = sample(f, spec3(17, 17, 17, 0.05 * lam));  // f on spacing 2h
  GridField a = project(gd, fam, BandKind::LowPass, N, {BoundaryPolicy::Clamp, true});
  GridField b = project(g, fam, BandKind::LowPass, N / lam, {BoundaryPolicy::Clamp, true});
  // LowPass_N(f o delta_2)(p) = (LowPass_{N/2} f)(delta_2 p): identical
  // weight tables and identical samples, so bitwise equality
  CHECK(a.data == b.data);
}

TEST_CASE("telescoping reconstruction is exact") {
  MollifierFamily fam;
  AnalyticField f = planar_wave(6.0);
  GridField g = sample(f, spec3(33, 33, 9, 0.05));
  ProjectOptions opt{BoundaryPolicy::Clamp, true};
  GridField acc = project(g, fam, BandKind::LowPass, 2.0, opt);
  for (double N : {4.0, 8.0, 16.0}) {
    GridField band = project(g, fam, BandKind::Band, N, opt);
    acc = axpy(1.0, band, acc);
  }
  GridField direct = project(g, fam, BandKind::LowPass, 16.0, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < acc.data.size(); ++i)
    worst = std::max(worst, std::abs(acc.data[i] - direct.data[i]));
  CHECK(worst <= 1e-13);

  // high pass complements the low pass exactly
  GridField hp = project(g, fam, BandKind::HighPass, 16.0, opt);
  for (std::size_t i = 0; i < hp.data.size(); i += 97)
    CHECK(hp.data[i] == doctest::Approx(g.data[i] - direct.data[i]).epsilon(1e-13));
}

TEST_CASE("smoothing estimate trend in N") {
  MollifierFamily fam;
  AnalyticField f = planar_wave(8.0);
  // z-independent field: the clamped z-window reduces to a 2-d convolution
  GridField g = sample(f, spec3(65, 65, 9, 1.0 / 32.0));
  double sup_f = sup_norm(g);
  std::vector<double> m;
  for (double N : {2.0, 4.0, 8.0}) {
    GridField lp = project(g, fam, BandKind::LowPass, N, {BoundaryPolicy::Clamp, true});
    // second gradient on the interior away from clamp bias
    GridField g2 = gradient(gradient(lp));
    GridSpec inner = spec3(17, 17, 5, 1.0 / 32.0);
    m.push_back(sup_norm_region(g2, inner) / sup_f);
  }
  // ||grad^2 LowPass(N) f|| <= C N^2 ||f||: doubling N should scale the
  // measurement by ~4, within a factor 3
  CHECK(m[1] / m[0] >= 4.0 / 3.0);
  CHECK(m[1] / m[0] <= 12.0);
  CHECK(m[2] / m[1] >= 4.0 / 3.0);
  CHECK(m[2] / m[1] <= 12.0);
}

TEST_CASE("shrink policy reports margins and errors when support exceeds the grid") {
  MollifierFamily fam;
  AnalyticField f = planar_wave(3.0);
  GridField g = sample(f, spec3(17, 17, 17, 0.05));
  // N = 1 kernel has gauge radius 1 >> grid extent
  CHECK_THROWS_AS(project(g, fam, BandKind::LowPass, 1.0, {BoundaryPolicy::Shrink, true}),
                  DomainShrinkError);
  GridField ok = project(g, fam, BandKind::LowPass, 16.0, {BoundaryPolicy::Shrink, true});
  auto mg = lowpass_margins(fam, 16.0, g.spec);
  CHECK(ok.margin[0] == mg[0]);
  CHECK(ok.margin[2] == mg[2]);
}

TEST_CASE("serial and OMP low pass agree bitwise") {
  MollifierFamily fam;
  AnalyticField f = planar_wave(5.0);
  GridField g = sample(f, spec3(21, 21, 13, 0.07));
  GridField a = lowpass_serial(g, fam, 8.0, BoundaryPolicy::Clamp);
  GridField b = lowpass_omp(g, fam, 8.0, BoundaryPolicy::Clamp);
  CHECK(a.data == b.data);
}
