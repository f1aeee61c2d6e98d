#pragma once

#include <array>
#include <optional>
#include <vector>

#include "heis/grid.hpp"

namespace heis {

struct GramSchmidtResult {
  std::vector<double> basis;   // k x D orthonormal rows
  std::vector<double> ratios;  // |^_{j<i} w_j| / |^_{j<=i} w_j| per step
};

// Classical Gram-Schmidt tracking the wedge-ratio normalisers; throws on
// near-dependence naming the offending index and residual size.
GramSchmidtResult gram_schmidt(std::span<const double> stack, int k, int D,
                               double indep_floor = 1e-10);

// Plain box lattice for frame bundles (separate from the anisotropic field
// grids so coarse frame grids can subsample them freely).
struct FrameLattice {
  Point origin{0, 0, 0};
  double dx = 1, dy = 1, dz = 1;
  int nx = 1, ny = 1, nz = 1;
  Point node(int i, int j, int k) const {
    return {origin.x + i * dx, origin.y + j * dy, origin.z + k * dz};
  }
  std::size_t nodes() const { return std::size_t(nx) * ny * nz; }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * ny + j) * nz + k; }
};

struct FrameField {
  FrameLattice lat;
  int D = 0, k = 0;
  std::vector<double> frames;  // per node, k x D row-major
  double smoothness = 0.0;     // max adjacent deviation / CC node distance
  double ortho_residual = 0.0;

  double* at(int i, int j, int kk) { return frames.data() + lat.index(i, j, kk) * k * D; }
  const double* at(int i, int j, int kk) const {
    return frames.data() + lat.index(i, j, kk) * k * D;
  }
};

double frame_smoothness(const FrameField& f);
double frame_ortho_residual(const FrameField& f);

struct ExtendOptions {
  int smooth_radius_xy = 2;  // partition-of-unity averaging radius, in nodes
  int smooth_radius_z = 2;
  std::optional<std::vector<double>> seed;  // unit seed at the center node
  double collapse_floor = 0.5;
};

// Adds one unit section orthogonal to the existing frames: center-seeded
// breadth-first propagation (deterministic sweep order), then a smoothing
// average over bump-weighted lattice translates followed by the
// Gram-Schmidt correction.  Requires k <= D - 4, the lifting hypothesis.
FrameField extend_frame(const FrameField& in, const ExtendOptions& opt = {});

// Orthonormal column stack U(p) : R^m -> R^D per lattice node, with the
// orthonormalised constraint 6-frame kept for projection.
struct IsometryField {
  FrameLattice lat;
  int D = 0, m = 0;
  std::vector<double> frame6;  // per node 6 x D
  std::vector<double> cols;    // per node m x D (rows of this array = columns of U)
  double min_constraint_det = 0.0;

  const double* frame_at(std::size_t node) const { return frame6.data() + node * 6 * D; }
  const double* cols_at(std::size_t node) const { return cols.data() + node * std::size_t(m) * D; }
};

struct BuildUOptions {
  double M = 1.0;
  double A = 8.0;
  double N0 = 4.0;           // recorded with the result
  int m = 0;                 // columns to build; default D - 9 when 0
  double indep_floor = 1e-10;
  ExtendOptions extend;
};

// Lemma-9.1 style construction from the low-passed field: per node apply
// Gram-Schmidt to the rescaled operators (M^-1 X, M^-1 Y, A Z, A XX, A YY,
// A XY) of psi_low, then extend the frame m times; U is columns 7..6+m.
IsometryField build_U(const GridField& psi_low, const BuildUOptions& opt);

// Same construction from precomputed six constraint fields stacked as one
// 6*D-dim field on a FrameLattice.
IsometryField build_U_from_six(const FrameLattice& lat, const std::vector<double>& six_stacks,
                               int D, const BuildUOptions& opt);

// Re-orthonormalised columns at an arbitrary point: trilinear interpolation
// of the coarse columns, projection against the local orthonormal 6-frame,
// then Gram-Schmidt.  Exactly orthogonal to the supplied local frame.
void columns_at(const IsometryField& U, const Point& p, std::span<const double> local_frame6,
                double* cols_out);

}  // namespace heis
