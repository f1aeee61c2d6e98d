#include "heis/grid.hpp"

#include <cmath>

namespace heis {

GridField sample(const AnalyticField& f, const GridSpec& spec, bool parallel) {
  GridField out(spec, f.dim);
#pragma omp parallel for collapse(2) if (parallel)
  for (int ix = 0; ix < spec.nx; ++ix)
    for (int iy = 0; iy < spec.ny; ++iy)
      for (int iz = 0; iz < spec.nz; ++iz) f.value(spec.node(ix, iy, iz), out.at(ix, iy, iz));
  return out;
}

namespace {

// nested 4th-order central differences of the value closure
void fd_apply(const AnalyticField& f, const std::string& word, std::size_t k, const Point& p,
              double step, double* out) {
  int dim = f.dim;
  if (k == word.size()) {
    f.value(p, out);
    return;
  }
  char op = word[k];
  std::vector<double> m2(dim), m1(dim), p1(dim), p2(dim);
  auto shift = [&](double t) -> Point {
    switch (op) {
      case 'X':
        return flow(HorizontalDir::X, t, p);
      case 'Y':
        return flow(HorizontalDir::Y, t, p);
      default:
        return Point{p.x, p.y, p.z + t};
    }
  };
  // flows along the right-invariant fields give exactly the directional
  // derivative at p
  fd_apply(f, word, k + 1, shift(-2 * step), step, m2.data());
  fd_apply(f, word, k + 1, shift(-step), step, m1.data());
  fd_apply(f, word, k + 1, shift(step), step, p1.data());
  fd_apply(f, word, k + 1, shift(2 * step), step, p2.data());
  for (int d = 0; d < dim; ++d)
    out[d] = (m2[d] - 8.0 * m1[d] + 8.0 * p1[d] - p2[d]) / (12.0 * step);
}

}  // namespace

AnalyticField derive(const AnalyticField& f, const DerivOp& op, double fd_step) {
  AnalyticField out;
  out.dim = f.dim;
  if (f.deriv) {
    auto base = f;
    std::string word = op.word;
    out.value = [base, word](const Point& p, double* o) { base.deriv(p, word, o); };
    out.deriv = [base, word](const Point& p, const std::string& w, double* o) {
      base.deriv(p, w + word, o);
    };
  } else {
    auto base = f;
    std::string word = op.word;
    double step = fd_step;
    out.value = [base, word, step](const Point& p, double* o) {
      fd_apply(base, word, 0, p, step, o);
    };
  }
  return out;
}

GridField crop(const GridField& f, const GridSpec& target) {
  target.validate();
  if (target.h != f.spec.h) throw std::invalid_argument("crop: spacing mismatch");
  // offset of target node (0,0,0) inside f
  double ox = (target.center.x - f.spec.center.x) / f.spec.h + f.spec.half(0) - target.half(0);
  double oy = (target.center.y - f.spec.center.y) / f.spec.h + f.spec.half(1) - target.half(1);
  double oz = (target.center.z - f.spec.center.z) / f.spec.hz() + f.spec.half(2) - target.half(2);
  auto as_int = [](double v, const char* what) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9) throw std::invalid_argument(std::string("crop: misaligned ") + what);
    return int(r);
  };
  int jx = as_int(ox, "x"), jy = as_int(oy, "y"), jz = as_int(oz, "z");
  GridField out(target, f.dim);
  for (int a = 0; a < 3; ++a) {
    int off = a == 0 ? jx : a == 1 ? jy : jz;
    out.margin[a] = std::max(0, f.margin[a] - off);
  }
  for (int ix = 0; ix < target.nx; ++ix)
    for (int iy = 0; iy < target.ny; ++iy)
      for (int iz = 0; iz < target.nz; ++iz) {
        int sx = ix + jx, sy = iy + jy, sz = iz + jz;
        if (sx < 0 || sx >= f.spec.nx || sy < 0 || sy >= f.spec.ny || sz < 0 || sz >= f.spec.nz)
          throw DomainShrinkError("crop: target extends outside source grid", f.margin);
        const double* src = f.at(sx, sy, sz);
        double* dst = out.at(ix, iy, iz);
        for (int d = 0; d < f.dim; ++d) dst[d] = src[d];
      }
  return out;
}

GridField axpy(double a, const GridField& x, const GridField& y) {
  if (!(x.spec == y.spec) || x.dim != y.dim) throw std::invalid_argument("axpy: field mismatch");
  GridField out = y;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += a * x.data[i];
  for (int k = 0; k < 3; ++k) out.margin[k] = std::max(x.margin[k], y.margin[k]);
  return out;
}

void scale_inplace(GridField& f, double a) {
  for (double& v : f.data) v *= a;
}

}  // namespace heis
