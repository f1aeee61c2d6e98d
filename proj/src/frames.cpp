#include "heis/frames.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "heis/metric.hpp"
#include "heis/wedge.hpp"

namespace heis {

GramSchmidtResult gram_schmidt(std::span<const double> stack, int k, int D, double indep_floor) {
  GramSchmidtResult out;
  out.basis.assign(stack.begin(), stack.begin() + std::size_t(k) * D);
  out.ratios.reserve(k);
  for (int i = 0; i < k; ++i) {
    double* vi = out.basis.data() + std::size_t(i) * D;
    for (int j = 0; j < i; ++j) {
      const double* vj = out.basis.data() + std::size_t(j) * D;
      double dot = 0.0;
      for (int d = 0; d < D; ++d) dot += vi[d] * vj[d];
      for (int d = 0; d < D; ++d) vi[d] -= dot * vj[d];
    }
    double nrm = 0.0;
    for (int d = 0; d < D; ++d) nrm += vi[d] * vi[d];
    nrm = std::sqrt(nrm);
    // input row norm for a relative dependence check
    double in_nrm = 0.0;
    for (int d = 0; d < D; ++d) in_nrm += stack[std::size_t(i) * D + d] * stack[std::size_t(i) * D + d];
    in_nrm = std::sqrt(in_nrm);
    if (!(nrm > indep_floor * std::max(1.0, in_nrm)))
      throw std::runtime_error("gram_schmidt: near-dependent input at index " + std::to_string(i) +
                               " (residual " + std::to_string(nrm) + ")");
    for (int d = 0; d < D; ++d) vi[d] /= nrm;
    out.ratios.push_back(1.0 / nrm);  // |^_{j<i} w_j| / |^_{j<=i} w_j|
  }
  return out;
}

double frame_smoothness(const FrameField& f) {
  double worst = 0.0;
  auto dev = [&](std::size_t a, std::size_t b, const Point& pa, const Point& pb) {
    const double* u = f.frames.data() + a * f.k * f.D;
    const double* v = f.frames.data() + b * f.k * f.D;
    double m = 0.0;
    for (int i = 0; i < f.k * f.D; ++i) m = std::max(m, std::abs(u[i] - v[i]));
    double dist = cc_distance(pa, pb, MetricKind::SubRiemannian);
    if (dist > 0.0) worst = std::max(worst, m / dist);
  };
  for (int i = 0; i < f.lat.nx; ++i)
    for (int j = 0; j < f.lat.ny; ++j)
      for (int k = 0; k < f.lat.nz; ++k) {
        if (i + 1 < f.lat.nx)
          dev(f.lat.index(i, j, k), f.lat.index(i + 1, j, k), f.lat.node(i, j, k),
              f.lat.node(i + 1, j, k));
        if (j + 1 < f.lat.ny)
          dev(f.lat.index(i, j, k), f.lat.index(i, j + 1, k), f.lat.node(i, j, k),
              f.lat.node(i, j + 1, k));
        if (k + 1 < f.lat.nz)
          dev(f.lat.index(i, j, k), f.lat.index(i, j, k + 1), f.lat.node(i, j, k),
              f.lat.node(i, j, k + 1));
      }
  return worst;
}

double frame_ortho_residual(const FrameField& f) {
  double worst = 0.0;
  for (std::size_t n = 0; n < f.lat.nodes(); ++n) {
    const double* v = f.frames.data() + n * f.k * f.D;
    for (int i = 0; i < f.k; ++i)
      for (int j = i; j < f.k; ++j) {
        double dot = 0.0;
        for (int d = 0; d < f.D; ++d) dot += v[i * f.D + d] * v[j * f.D + d];
        worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
  }
  return worst;
}

namespace {

// project v onto the orthogonal complement of the k frame rows at node
void project_out(const double* frame, int k, int D, double* v) {
  for (int i = 0; i < k; ++i) {
    const double* fi = frame + std::size_t(i) * D;
    double dot = 0.0;
    for (int d = 0; d < D; ++d) dot += v[d] * fi[d];
    for (int d = 0; d < D; ++d) v[d] -= dot * fi[d];
  }
}

double norm_of(const double* v, int D) {
  double s = 0.0;
  for (int d = 0; d < D; ++d) s += v[d] * v[d];
  return std::sqrt(s);
}

}  // namespace

FrameField extend_frame(const FrameField& in, const ExtendOptions& opt) {
  const int D = in.D, k = in.k;
  if (!(k >= 1 && k <= D - 4))
    throw std::invalid_argument("extend_frame: requires 1 <= k <= D-4, got k=" +
                                std::to_string(k) + ", D=" + std::to_string(D));
  const FrameLattice& lat = in.lat;
  const std::size_t nn = lat.nodes();
  std::vector<double> sec(nn * D, 0.0);  // the new section before smoothing
  std::vector<char> visited(nn, 0);

  // deterministic seed at the center node
  int ci = (lat.nx - 1) / 2, cj = (lat.ny - 1) / 2, ck = (lat.nz - 1) / 2;
  std::size_t cn = lat.index(ci, cj, ck);
  {
    std::vector<double> v(D, 0.0);
    if (opt.seed) {
      if (int(opt.seed->size()) != D) throw std::invalid_argument("extend_frame: bad seed size");
      v = *opt.seed;
    } else {
      // first standard basis vector with a usable normal component
      for (int e = 0; e < D; ++e) {
        std::fill(v.begin(), v.end(), 0.0);
        v[e] = 1.0;
        project_out(in.frames.data() + cn * k * D, k, D, v.data());
        if (norm_of(v.data(), D) >= 0.5) break;
      }
    }
    project_out(in.frames.data() + cn * k * D, k, D, v.data());
    double nrm = norm_of(v.data(), D);
    if (nrm < opt.collapse_floor)
      throw std::runtime_error("extend_frame: seed collapsed at the center node");
    for (int d = 0; d < D; ++d) sec[cn * D + d] = v[d] / nrm;
    visited[cn] = 1;
  }

  // breadth-first sweep; fixed neighbour preference, fixed frontier order
  std::deque<std::array<int, 3>> frontier{{ci, cj, ck}};
  const int off[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  while (!frontier.empty()) {
    auto [i, j, kk] = frontier.front();
    frontier.pop_front();
    std::size_t n = lat.index(i, j, kk);
    for (const auto& o : off) {
      int ni = i + o[0], nj = j + o[1], nk = kk + o[2];
      if (ni < 0 || ni >= lat.nx || nj < 0 || nj >= lat.ny || nk < 0 || nk >= lat.nz) continue;
      std::size_t m = lat.index(ni, nj, nk);
      if (visited[m]) continue;
      std::vector<double> v(sec.begin() + n * D, sec.begin() + n * D + D);
      project_out(in.frames.data() + m * k * D, k, D, v.data());
      double nrm = norm_of(v.data(), D);
      if (nrm < opt.collapse_floor)
        throw std::runtime_error(
            "extend_frame: propagation collapse at node (" + std::to_string(ni) + "," +
            std::to_string(nj) + "," + std::to_string(nk) +
            "); input frames rougher than the lifting hypothesis allows");
      for (int d = 0; d < D; ++d) sec[m * D + d] = v[d] / nrm;
      visited[m] = 1;
      frontier.push_back({ni, nj, nk});
    }
  }

  // smoothing: normalised bump average over lattice translates, then the
  // w_{k+1} Gram-Schmidt correction
  auto bump = [](double t) { return std::abs(t) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - t * t)); };
  const int rx = opt.smooth_radius_xy, rz = opt.smooth_radius_z;
  std::vector<double> smoothed(nn * D);
#pragma omp parallel for collapse(2)
  for (int i = 0; i < lat.nx; ++i)
    for (int j = 0; j < lat.ny; ++j)
      for (int kk = 0; kk < lat.nz; ++kk) {
        std::vector<double> acc(D, 0.0);
        double wsum = 0.0;
        for (int a = -rx; a <= rx; ++a)
          for (int b = -rx; b <= rx; ++b)
            for (int c = -rz; c <= rz; ++c) {
              int ii = i + a, jj = j + b, kz = kk + c;
              if (ii < 0 || ii >= lat.nx || jj < 0 || jj >= lat.ny || kz < 0 || kz >= lat.nz)
                continue;
              double w = bump(a / (rx + 0.5)) * bump(b / (rx + 0.5)) * bump(c / (rz + 0.5));
              const double* v = sec.data() + lat.index(ii, jj, kz) * D;
              for (int d = 0; d < D; ++d) acc[d] += w * v[d];
              wsum += w;
            }
        std::size_t n = lat.index(i, j, kk);
        project_out(in.frames.data() + n * k * D, k, D, acc.data());
        double nrm = norm_of(acc.data(), D);
        if (nrm < opt.collapse_floor * wsum)
          throw std::runtime_error("extend_frame: smoothing collapse");
        for (int d = 0; d < D; ++d) smoothed[n * D + d] = acc[d] / nrm;
      }

  FrameField out;
  out.lat = lat;
  out.D = D;
  out.k = k + 1;
  out.frames.resize(nn * std::size_t(k + 1) * D);
  for (std::size_t n = 0; n < nn; ++n) {
    const double* src = in.frames.data() + n * k * D;
    double* dst = out.frames.data() + n * std::size_t(k + 1) * D;
    for (int i = 0; i < k * D; ++i) dst[i] = src[i];
    for (int d = 0; d < D; ++d) dst[k * D + d] = smoothed[n * D + d];
  }
  out.smoothness = frame_smoothness(out);
  out.ortho_residual = frame_ortho_residual(out);
  return out;
}

IsometryField build_U_from_six(const FrameLattice& lat, const std::vector<double>& six_stacks,
                               int D, const BuildUOptions& opt) {
  const std::size_t nn = lat.nodes();
  if (six_stacks.size() != nn * 6 * std::size_t(D))
    throw std::invalid_argument("build_U_from_six: stack size mismatch");
  int m = opt.m > 0 ? opt.m : D - 9;
  if (6 + m > D - 3) throw std::invalid_argument("build_U_from_six: 6+m must be <= D-3");

  FrameField f;
  f.lat = lat;
  f.D = D;
  f.k = 6;
  f.frames.resize(nn * 6 * std::size_t(D));
  double min_det = 1e300;
  for (std::size_t n = 0; n < nn; ++n) {
    std::span<const double> st(six_stacks.data() + n * 6 * D, 6 * std::size_t(D));
    double det = wedge_norm_sq(st, 6, D);
    if (det < min_det) min_det = det;
    GramSchmidtResult gs;
    try {
      gs = gram_schmidt(st, 6, D, opt.indep_floor);
    } catch (const std::exception& e) {
      // name the node and the smallest singular value of the stack
      Eigen::MatrixXd mat(6, D);
      for (int i = 0; i < 6; ++i)
        for (int d = 0; d < D; ++d) mat(i, d) = st[std::size_t(i) * D + d];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
      throw std::runtime_error("build_U: constraint vectors dependent at node " +
                               std::to_string(n) + ", smallest singular value " +
                               std::to_string(svd.singularValues()(5)) + " (" + e.what() + ")");
    }
    std::copy(gs.basis.begin(), gs.basis.end(), f.frames.begin() + n * 6 * std::size_t(D));
  }

  for (int step = 0; step < m; ++step) f = extend_frame(f, opt.extend);

  IsometryField out;
  out.lat = lat;
  out.D = D;
  out.m = m;
  out.min_constraint_det = min_det;
  out.frame6.resize(nn * 6 * std::size_t(D));
  out.cols.resize(nn * std::size_t(m) * D);
  for (std::size_t n = 0; n < nn; ++n) {
    const double* fr = f.frames.data() + n * std::size_t(6 + m) * D;
    std::copy(fr, fr + 6 * std::size_t(D), out.frame6.begin() + n * 6 * std::size_t(D));
    std::copy(fr + 6 * std::size_t(D), fr + std::size_t(6 + m) * D,
              out.cols.begin() + n * std::size_t(m) * D);
  }
  return out;
}

IsometryField build_U(const GridField& psi_low, const BuildUOptions& opt) {
  // six rescaled constraint fields by 4th-order stencils
  const char* words[6] = {"X", "Y", "Z", "XX", "YY", "XY"};
  const double scales[6] = {1.0 / opt.M, 1.0 / opt.M, opt.A, opt.A, opt.A, opt.A};
  // note the Gram-Schmidt order follows the rescaled operator list
  std::vector<GridField> six;
  six.reserve(6);
  std::array<int, 3> mg{0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    GridField g = derive(psi_low, DerivOp{words[i]});
    scale_inplace(g, scales[i]);
    for (int a = 0; a < 3; ++a) mg[a] = std::max(mg[a], g.margin[a]);
    six.push_back(std::move(g));
  }
  const GridSpec& s = psi_low.spec;
  FrameLattice lat;
  lat.nx = s.nx - 2 * mg[0];
  lat.ny = s.ny - 2 * mg[1];
  lat.nz = s.nz - 2 * mg[2];
  lat.dx = s.h;
  lat.dy = s.h;
  lat.dz = s.hz();
  lat.origin = s.node(mg[0], mg[1], mg[2]);
  const int D = psi_low.dim;
  std::vector<double> stacks(lat.nodes() * 6 * std::size_t(D));
  for (int i = 0; i < lat.nx; ++i)
    for (int j = 0; j < lat.ny; ++j)
      for (int k = 0; k < lat.nz; ++k) {
        std::size_t n = lat.index(i, j, k);
        for (int w = 0; w < 6; ++w) {
          const double* v = six[w].at(i + mg[0], j + mg[1], k + mg[2]);
          std::copy(v, v + D, stacks.begin() + (n * 6 + w) * std::size_t(D));
        }
      }
  return build_U_from_six(lat, stacks, D, opt);
}

void columns_at(const IsometryField& U, const Point& p, std::span<const double> local_frame6,
                double* cols_out) {
  const FrameLattice& lat = U.lat;
  const int D = U.D, m = U.m;
  // trilinear weights in lattice index space, clamped to the box
  auto locate = [](double t, int n) {
    double u = std::clamp(t, 0.0, double(n - 1) - 1e-12);
    int i0 = std::min(n - 2 >= 0 ? n - 2 : 0, int(u));
    return std::pair<int, double>(i0, u - i0);
  };
  double tx = (p.x - lat.origin.x) / lat.dx;
  double ty = (p.y - lat.origin.y) / lat.dy;
  double tz = (p.z - lat.origin.z) / lat.dz;
  auto [i0, fx] = locate(tx, lat.nx);
  auto [j0, fy] = locate(ty, lat.ny);
  auto [k0, fz] = locate(tz, lat.nz);
  if (lat.nx == 1) fx = 0.0;
  if (lat.ny == 1) fy = 0.0;
  if (lat.nz == 1) fz = 0.0;

  std::fill(cols_out, cols_out + std::size_t(m) * D, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        int ii = std::min(i0 + a, lat.nx - 1), jj = std::min(j0 + b, lat.ny - 1),
            kk = std::min(k0 + c, lat.nz - 1);
        double w = (a ? fx : 1 - fx) * (b ? fy : 1 - fy) * (c ? fz : 1 - fz);
        if (w == 0.0) continue;
        const double* src = U.cols_at(lat.index(ii, jj, kk));
        for (std::size_t t = 0; t < std::size_t(m) * D; ++t) cols_out[t] += w * src[t];
      }

  // exact orthogonality to the local constraint frame, then orthonormalise
  for (int i = 0; i < m; ++i) {
    double* v = cols_out + std::size_t(i) * D;
    project_out(local_frame6.data(), 6, D, v);
    for (int j = 0; j < i; ++j) {
      const double* u = cols_out + std::size_t(j) * D;
      double dot = 0.0;
      for (int d = 0; d < D; ++d) dot += v[d] * u[d];
      for (int d = 0; d < D; ++d) v[d] -= dot * u[d];
    }
    double nrm = norm_of(v, D);
    if (nrm < 0.25)
      throw std::runtime_error("columns_at: interpolated columns degenerate at query point");
    for (int d = 0; d < D; ++d) v[d] /= nrm;
  }
}

}  // namespace heis
