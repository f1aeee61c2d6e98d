#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heis/group.hpp"

namespace heis {

struct DomainShrinkError : std::runtime_error {
  std::array<int, 3> margin;
  DomainShrinkError(const std::string& what, std::array<int, 3> m)
      : std::runtime_error(what), margin(m) {}
};

// Anisotropic grid: spacing h in x,y and h^2 in z (z is second order under
// the dilations).  Node counts are odd so the center is a node.
struct GridSpec {
  Point center{0.0, 0.0, 0.0};
  double h = 0.0;
  int nx = 0, ny = 0, nz = 0;

  double hz() const { return h * h; }
  int half(int axis) const { return ((axis == 0 ? nx : axis == 1 ? ny : nz) - 1) / 2; }
  std::size_t nodes() const {
    return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
  }
  Point node(int ix, int iy, int iz) const {
    return {center.x + (ix - half(0)) * h, center.y + (iy - half(1)) * h,
            center.z + (iz - half(2)) * hz()};
  }
  void validate() const {
    if (nx < 1 || ny < 1 || nz < 1 || h <= 0.0) throw std::invalid_argument("bad GridSpec");
    if (nx % 2 == 0 || ny % 2 == 0 || nz % 2 == 0)
      throw std::invalid_argument("GridSpec: node counts must be odd");
  }
  bool operator==(const GridSpec& o) const {
    return center.x == o.center.x && center.y == o.center.y && center.z == o.center.z &&
           h == o.h && nx == o.nx && ny == o.ny && nz == o.nz;
  }
};

// Sampled map H -> R^dim.  margin[a] counts invalid nodes on each side of
// axis a (grown by stencils and mollifiers under the shrink policy).
struct GridField {
  GridSpec spec;
  int dim = 0;
  std::array<int, 3> margin{0, 0, 0};
  std::vector<double> data;

  GridField() = default;
  GridField(const GridSpec& s, int d) : spec(s), dim(d) {
    spec.validate();
    data.assign(spec.nodes() * std::size_t(d), 0.0);
  }

  std::size_t idx(int ix, int iy, int iz) const {
    return ((std::size_t(ix) * spec.ny + iy) * spec.nz + iz) * dim;
  }
  double* at(int ix, int iy, int iz) { return data.data() + idx(ix, iy, iz); }
  const double* at(int ix, int iy, int iz) const { return data.data() + idx(ix, iy, iz); }

  bool valid(int ix, int iy, int iz) const {
    return ix >= margin[0] && ix < spec.nx - margin[0] && iy >= margin[1] &&
           iy < spec.ny - margin[1] && iz >= margin[2] && iz < spec.nz - margin[2];
  }
  void require_interior() const {
    if (2 * margin[0] >= spec.nx || 2 * margin[1] >= spec.ny || 2 * margin[2] >= spec.nz)
      throw DomainShrinkError(
          "grid valid region is empty after shrink (margins " + std::to_string(margin[0]) + "," +
              std::to_string(margin[1]) + "," + std::to_string(margin[2]) + ")",
          margin);
  }
  // evaluation outside the valid extent is an error, never extrapolated
  std::span<const double> value(int ix, int iy, int iz) const {
    if (!valid(ix, iy, iz)) throw DomainShrinkError("grid evaluation outside valid extent", margin);
    return {at(ix, iy, iz), std::size_t(dim)};
  }
};

// Derivative word over {X,Y,Z}, applied right to left: "XY" f = X(Y f).
struct DerivOp {
  std::string word;
  static DerivOp X() { return {"X"}; }
  static DerivOp Y() { return {"Y"}; }
  static DerivOp Z() { return {"Z"}; }
  static DerivOp XX() { return {"XX"}; }
  static DerivOp YY() { return {"YY"}; }
  static DerivOp XY() { return {"XY"}; }
  static DerivOp YX() { return {"YX"}; }
};

// Map with an exact evaluation closure and optional exact derivatives.
// Without a derivative closure, derive() falls back to nested central
// differences of the value closure.
struct AnalyticField {
  int dim = 0;
  std::function<void(const Point&, double*)> value;
  std::function<void(const Point&, const std::string& word, double*)> deriv;  // optional

  void eval(const Point& p, double* out) const { value(p, out); }
};

GridField sample(const AnalyticField& f, const GridSpec& spec, bool parallel = true);

AnalyticField derive(const AnalyticField& f, const DerivOp& op, double fd_step = 1e-5);

GridField crop(const GridField& f, const GridSpec& target);

// pointwise helpers
GridField axpy(double a, const GridField& x, const GridField& y);  // a*x + y
void scale_inplace(GridField& f, double a);

}  // namespace heis
