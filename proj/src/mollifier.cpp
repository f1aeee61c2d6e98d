#include "heis/mollifier.hpp"

#include <cmath>
#include <vector>

namespace heis {

double MollifierFamily::haar_mass(int res) const {
  // separable: mass = (int bx)^2 * (int bz), then normalised by itself;
  // report the Simpson-quadrature estimate of |mass/mass_ref - 1| + 1 via
  // two resolutions would be overkill: we return the integral of the
  // unit-normalised kernel computed at the requested resolution.
  auto line_mass = [&](int n) {
    double s = 0.0;
    double hh = 2.0 * support / n;
    for (int i = 0; i < n; ++i) {
      double t = -support + (i + 0.5) * hh;
      s += profile(t) * hh;
    }
    return s;
  };
  double ref = line_mass(res) * line_mass(res) * line_mass(res);
  double fine = line_mass(2 * res) * line_mass(2 * res) * line_mass(2 * res);
  return fine == 0.0 ? 0.0 : ref / fine;
}

int kernel_halfwidth_xy(const MollifierFamily& fam, double N, double h) {
  return std::max(0, int(std::floor(fam.support / (N * h) - 1e-12)));
}

int kernel_halfwidth_z(const MollifierFamily& fam, double N, double h) {
  return std::max(0, int(std::floor(fam.support / (N * N * h * h) - 1e-12)));
}

std::array<int, 3> lowpass_margins(const MollifierFamily& fam, double N, const GridSpec& spec) {
  int kx = kernel_halfwidth_xy(fam, N, spec.h);
  int kz = kernel_halfwidth_z(fam, N, spec.h);
  // worst-case integer z-shift of the twisted window over the grid
  double ybase = spec.center.y / spec.h;
  int ymax = int(std::ceil(std::abs(ybase))) + spec.half(1);
  return {kx, kx, kz + kx * ymax};
}

namespace {

GridField lowpass_impl(const GridField& f, const MollifierFamily& fam, double N,
                       BoundaryPolicy policy, bool parallel) {
  const GridSpec& s = f.spec;
  // the twist sends the kernel z-argument to exact grid cells only when the
  // center y is grid-aligned
  double ybase = s.center.y / s.h;
  if (std::abs(ybase - std::round(ybase)) > 1e-9)
    throw std::invalid_argument("project: grid center y must be a multiple of h");
  const int ybase_i = int(std::round(ybase));

  const int kx = kernel_halfwidth_xy(fam, N, s.h);
  const int kz = kernel_halfwidth_z(fam, N, s.h);
  std::vector<double> wx(2 * kx + 1), wz(2 * kz + 1);
  for (int j = -kx; j <= kx; ++j) wx[j + kx] = fam.profile(N * j * s.h);
  for (int m = -kz; m <= kz; ++m) wz[m + kz] = fam.profile(N * N * m * s.hz());

  GridField out(s, f.dim);
  out.margin = f.margin;
  if (policy == BoundaryPolicy::Shrink) {
    auto mg = lowpass_margins(fam, N, s);
    for (int a = 0; a < 3; ++a) out.margin[a] += mg[a];
    out.require_interior();
  }

  const int dim = f.dim;
  const int mx = f.margin[0], my = f.margin[1], mz = f.margin[2];
#pragma omp parallel for collapse(2) if (parallel)
  for (int ix = out.margin[0]; ix < s.nx - out.margin[0]; ++ix)
    for (int iy = out.margin[1]; iy < s.ny - out.margin[1]; ++iy) {
      std::vector<double> acc(std::size_t(s.nz) * dim, 0.0);
      std::vector<double> wsum(s.nz, 0.0);
      for (int jx = -kx; jx <= kx; ++jx) {
        int qx = ix - jx;
        if (qx < mx || qx >= s.nx - mx) continue;
        for (int jy = -kx; jy <= kx; ++jy) {
          int qy = iy - jy;
          if (qy < my || qy >= s.ny - my) continue;
          double wxy = wx[jx + kx] * wx[jy + kx];
          if (wxy == 0.0) continue;
          // K_N argument is (dx, dy, dz - q_y dx); on the lattice the twist
          // is the integer z-shift (q_y/h) * jx
          long shift = long(qy - s.half(1) + ybase_i) * jx;
          const double* src = f.at(qx, qy, 0);
          for (int iz = out.margin[2]; iz < s.nz - out.margin[2]; ++iz) {
            double* a = acc.data() + std::size_t(iz) * dim;
            double& wacc = wsum[iz];
            long zc = long(iz) - shift;
            int m0 = int(std::max(long(mz), zc - kz));
            int m1 = int(std::min(long(s.nz - mz - 1), zc + kz));
            for (int qz = m0; qz <= m1; ++qz) {
              double w = wxy * wz[zc - qz + kz];
              if (w == 0.0) continue;
              const double* v = src + std::size_t(qz) * dim;
              for (int d = 0; d < dim; ++d) a[d] += w * v[d];
              wacc += w;
            }
          }
        }
      }
      for (int iz = out.margin[2]; iz < s.nz - out.margin[2]; ++iz) {
        double* o = out.at(ix, iy, iz);
        double w = wsum[iz];
        if (w <= 0.0) {
          // twisted window missed the grid entirely; keep the sample
          const double* v = f.at(ix, iy, iz);
          for (int d = 0; d < dim; ++d) o[d] = v[d];
          continue;
        }
        const double* a = acc.data() + std::size_t(iz) * dim;
        for (int d = 0; d < dim; ++d) o[d] = a[d] / w;
      }
    }
  return out;
}

}  // namespace

GridField lowpass_serial(const GridField& f, const MollifierFamily& fam, double N,
                         BoundaryPolicy policy) {
  return lowpass_impl(f, fam, N, policy, false);
}

GridField lowpass_omp(const GridField& f, const MollifierFamily& fam, double N,
                      BoundaryPolicy policy) {
  return lowpass_impl(f, fam, N, policy, true);
}

GridField project(const GridField& f, const MollifierFamily& fam, BandKind kind, double N,
                  const ProjectOptions& opt) {
  switch (kind) {
    case BandKind::LowPass:
      return lowpass_impl(f, fam, N, opt.policy, opt.parallel);
    case BandKind::Band: {
      GridField hi = lowpass_impl(f, fam, N, opt.policy, opt.parallel);
      GridField lo = lowpass_impl(f, fam, 0.5 * N, opt.policy, opt.parallel);
      GridField out = axpy(-1.0, lo, hi);
      return out;
    }
    case BandKind::HighPass: {
      GridField lo = lowpass_impl(f, fam, N, opt.policy, opt.parallel);
      GridField out = axpy(-1.0, lo, f);
      for (int a = 0; a < 3; ++a) out.margin[a] = std::max(out.margin[a], lo.margin[a]);
      return out;
    }
  }
  throw std::logic_error("project: bad band kind");
}

}  // namespace heis
