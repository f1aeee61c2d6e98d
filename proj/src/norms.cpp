#include "heis/norms.hpp"

#include <cmath>
#include <random>

#include "heis/deriv.hpp"
#include "heis/metric.hpp"

namespace heis {

namespace {

// all words of length j over {X,Y}, fixed order for determinism
std::vector<std::string> grad_words(int j) {
  std::vector<std::string> out{""};
  for (int i = 0; i < j; ++i) {
    std::vector<std::string> next;
    for (const auto& w : out) {
      next.push_back("X" + w);
      next.push_back("Y" + w);
    }
    out = std::move(next);
  }
  return out;
}

// grad^j f as one stacked field
GridField grad_stack(const GridField& f, int j) {
  if (j == 0) return f;
  auto words = grad_words(j);
  std::vector<GridField> parts;
  parts.reserve(words.size());
  std::array<int, 3> m{0, 0, 0};
  for (const auto& w : words) {
    parts.push_back(derive(f, DerivOp{w}));
    for (int a = 0; a < 3; ++a) m[a] = std::max(m[a], parts.back().margin[a]);
  }
  GridField out(f.spec, int(words.size()) * f.dim);
  out.margin = m;
  const std::size_t n = f.spec.nodes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t w = 0; w < parts.size(); ++w)
      for (int d = 0; d < f.dim; ++d)
        out.data[i * out.dim + w * f.dim + d] = parts[w].data[i * f.dim + d];
  return out;
}

}  // namespace

double holder_seminorm(const GridField& f, double alpha, const HolderOptions& opt) {
  f.require_interior();
  const GridSpec& s = f.spec;
  double best = 0.0;
  auto quotient = [&](int ax, int ay, int az, int bx, int by, int bz) {
    const double* u = f.at(ax, ay, az);
    const double* v = f.at(bx, by, bz);
    double num = 0.0;
    for (int d = 0; d < f.dim; ++d) num += (u[d] - v[d]) * (u[d] - v[d]);
    double dist = cc_distance(s.node(ax, ay, az), s.node(bx, by, bz), MetricKind::SubRiemannian);
    if (dist <= 0.0) return 0.0;
    return std::sqrt(num) / std::pow(dist, alpha);
  };
  // nearest-neighbour pairs along each axis
  for (int ix = f.margin[0]; ix < s.nx - f.margin[0]; ++ix)
    for (int iy = f.margin[1]; iy < s.ny - f.margin[1]; ++iy)
      for (int iz = f.margin[2]; iz < s.nz - f.margin[2]; ++iz) {
        if (ix + 1 < s.nx - f.margin[0]) best = std::max(best, quotient(ix, iy, iz, ix + 1, iy, iz));
        if (iy + 1 < s.ny - f.margin[1]) best = std::max(best, quotient(ix, iy, iz, ix, iy + 1, iz));
        if (iz + 1 < s.nz - f.margin[2]) best = std::max(best, quotient(ix, iy, iz, ix, iy, iz + 1));
      }
  // random pairs with CC distance in [h, L/2]
  std::mt19937_64 rng(opt.seed);
  double L = std::max({s.half(0) * s.h, s.half(1) * s.h, std::sqrt(s.half(2) * s.hz())});
  auto draw = [&](int lo, int hi) {
    return int(std::uniform_int_distribution<int>(lo, hi - 1)(rng));
  };
  for (int i = 0; i < opt.random_pairs; ++i) {
    int ax = draw(f.margin[0], s.nx - f.margin[0]);
    int ay = draw(f.margin[1], s.ny - f.margin[1]);
    int az = draw(f.margin[2], s.nz - f.margin[2]);
    int bx = draw(f.margin[0], s.nx - f.margin[0]);
    int by = draw(f.margin[1], s.ny - f.margin[1]);
    int bz = draw(f.margin[2], s.nz - f.margin[2]);
    double dist = cc_distance(s.node(ax, ay, az), s.node(bx, by, bz), MetricKind::SubRiemannian);
    if (dist < s.h || dist > 0.5 * L) continue;
    best = std::max(best, quotient(ax, ay, az, bx, by, bz));
  }
  return best;
}

double norm(const GridField& f, const ScaledNorm& n, const HolderOptions& opt) {
  double total = 0.0;
  GridField top;
  for (int j = 0; j <= n.k; ++j) {
    GridField g = grad_stack(f, j);
    total += std::pow(n.R, j) * sup_norm(g);
    if (j == n.k) top = std::move(g);
  }
  if (n.kind == ScaledNorm::Kind::CkAlpha)
    total += std::pow(n.R, n.k + n.alpha) * holder_seminorm(top, n.alpha, opt);
  return total;
}

}  // namespace heis
