#include "heis/deriv.hpp"

#include <cmath>

namespace heis {

namespace {

// 4th-order first-derivative stencils on a 5-point window; row s gives the
// coefficients when the evaluation point sits at position s of the window
// (0 = left edge, 2 = centered, 4 = right edge), divided by 12h.
constexpr double kStencil[5][5] = {
    {-25.0, 48.0, -36.0, 16.0, -3.0},
    {-3.0, -10.0, 18.0, -6.0, 1.0},
    {1.0, -8.0, 0.0, 8.0, -1.0},
    {-1.0, 6.0, -18.0, 10.0, 3.0},
    {3.0, -16.0, 36.0, -48.0, 25.0},
};

struct AxisPlan {
  int start;   // window start offset relative to the node
  const double* c;
};

inline AxisPlan plan(int i, int lo, int hi /*inclusive*/) {
  // choose the 5-point window [i+start, i+start+4] inside [lo,hi]
  int pos = 2;
  if (i - 2 < lo) pos = i - lo;
  if (i + 2 > hi) pos = 4 - (hi - i);
  return {-pos, kStencil[pos]};
}

inline void stencil_node(const GridField& f, int ix, int iy, int iz, char op, bool extended,
                         double* out) {
  const int dim = f.dim;
  const double ih = 1.0 / (12.0 * f.spec.h);
  const double ihz = 1.0 / (12.0 * f.spec.hz());
  auto axis_apply = [&](int axis, double inv, double w, double* acc) {
    int i = axis == 0 ? ix : axis == 1 ? iy : iz;
    int lo = f.margin[axis];
    int hi = (axis == 0 ? f.spec.nx : axis == 1 ? f.spec.ny : f.spec.nz) - f.margin[axis] - 1;
    AxisPlan pl = extended ? plan(i, lo, hi) : AxisPlan{-2, kStencil[2]};
    for (int t = 0; t < 5; ++t) {
      double c = pl.c[t];
      if (c == 0.0) continue;
      int j = i + pl.start + t;
      const double* v = axis == 0 ? f.at(j, iy, iz) : axis == 1 ? f.at(ix, j, iz) : f.at(ix, iy, j);
      double cw = w * inv * c;
      for (int d = 0; d < dim; ++d) acc[d] += cw * v[d];
    }
  };
  for (int d = 0; d < dim; ++d) out[d] = 0.0;
  switch (op) {
    case 'X': {
      axis_apply(0, ih, 1.0, out);
      double y = f.spec.node(ix, iy, iz).y;  // the twist uses the node's own y
      axis_apply(2, ihz, y, out);
      break;
    }
    case 'Y':
      axis_apply(1, ih, 1.0, out);
      break;
    case 'Z':
      axis_apply(2, ihz, 1.0, out);
      break;
    default:
      throw std::invalid_argument("stencil: bad op");
  }
}

GridField apply_field(const GridField& f, char op, bool parallel, bool extended) {
  GridField out(f.spec, f.dim);
  out.margin = f.margin;
  if (!extended) {
    if (op == 'X') {
      out.margin[0] += 2;
      out.margin[2] += 2;
    } else if (op == 'Y') {
      out.margin[1] += 2;
    } else {
      out.margin[2] += 2;
    }
  } else {
    // biased stencils need at least 5 valid nodes per involved axis
    auto need = [&](int axis) {
      int n = axis == 0 ? f.spec.nx : axis == 1 ? f.spec.ny : f.spec.nz;
      if (n - 2 * f.margin[axis] < 5)
        throw DomainShrinkError("derive_extended: fewer than 5 valid nodes on an axis", f.margin);
    };
    if (op == 'X') {
      need(0);
      need(2);
    } else if (op == 'Y') {
      need(1);
    } else {
      need(2);
    }
  }
  out.require_interior();
  const int x0 = out.margin[0], x1 = f.spec.nx - out.margin[0];
  const int y0 = out.margin[1], y1 = f.spec.ny - out.margin[1];
  const int z0 = out.margin[2], z1 = f.spec.nz - out.margin[2];
#pragma omp parallel for collapse(2) if (parallel)
  for (int ix = x0; ix < x1; ++ix)
    for (int iy = y0; iy < y1; ++iy)
      for (int iz = z0; iz < z1; ++iz)
        stencil_node(f, ix, iy, iz, op, extended, out.at(ix, iy, iz));
  return out;
}

GridField derive_impl(const GridField& f, const DerivOp& op, bool parallel, bool extended) {
  GridField cur = f;
  bool first = true;
  for (auto it = op.word.rbegin(); it != op.word.rend(); ++it) {
    cur = apply_field(first ? f : cur, *it, parallel, extended);
    first = false;
  }
  if (first) return f;
  return cur;
}

GridField gradient_impl(const GridField& f, bool parallel, bool extended) {
  GridField fx = apply_field(f, 'X', parallel, extended);
  GridField fy = apply_field(f, 'Y', parallel, extended);
  GridField out(f.spec, 2 * f.dim);
  for (int k = 0; k < 3; ++k) out.margin[k] = std::max(fx.margin[k], fy.margin[k]);
  const std::size_t n = f.spec.nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < f.dim; ++d) {
      out.data[i * out.dim + d] = fx.data[i * f.dim + d];
      out.data[i * out.dim + f.dim + d] = fy.data[i * f.dim + d];
    }
  }
  return out;
}

}  // namespace

GridField apply_field_serial(const GridField& f, char op) { return apply_field(f, op, false, false); }
GridField apply_field_omp(const GridField& f, char op) { return apply_field(f, op, true, false); }

GridField derive(const GridField& f, const DerivOp& op, bool parallel) {
  return derive_impl(f, op, parallel, false);
}

GridField derive_extended(const GridField& f, const DerivOp& op, bool parallel) {
  return derive_impl(f, op, parallel, true);
}

GridField gradient(const GridField& f, bool parallel) { return gradient_impl(f, parallel, false); }

GridField gradient_extended(const GridField& f, bool parallel) {
  return gradient_impl(f, parallel, true);
}

double sup_norm(const GridField& f) {
  double s = 0.0;
  for (int ix = f.margin[0]; ix < f.spec.nx - f.margin[0]; ++ix)
    for (int iy = f.margin[1]; iy < f.spec.ny - f.margin[1]; ++iy)
      for (int iz = f.margin[2]; iz < f.spec.nz - f.margin[2]; ++iz) {
        const double* v = f.at(ix, iy, iz);
        double m = 0.0;
        for (int d = 0; d < f.dim; ++d) m += v[d] * v[d];
        s = std::max(s, m);
      }
  return std::sqrt(s);
}

double sup_norm_region(const GridField& f, const GridSpec& region) {
  GridField c = crop(f, region);
  return sup_norm(c);
}

}  // namespace heis
