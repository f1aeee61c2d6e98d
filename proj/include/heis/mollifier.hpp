#pragma once

#include "heis/grid.hpp"

namespace heis {

enum class BoundaryPolicy { Shrink, Clamp };

enum class BandKind { LowPass, Band, HighPass };

// Dilated unit-mass mollifier family standing in for the spectral
// Littlewood-Paley projections.  The kernel is a C-infinity product bump
// bx(x) bx(y) bz(z) supported exactly in the gauge ball {gauge <= 1};
// K_N(g) = N^4 K(delta_N g).  Group convolution K_N * f is taken by
// quadrature on the grid lattice itself, which the twist term maps to
// integer z-shifts, and the discrete weights are normalised per node so
// constants are preserved exactly.
struct MollifierFamily {
  double support = 1.0;  // kernel support radius in gauge

  double profile(double t) const {  // unnormalised 1-d bump on (-1,1)
    double u = t / support;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
  }
  // continuum unit-mass check for the certificate (quadrature at >= res
  // points per axis); returns the Haar integral of the normalised kernel
  double haar_mass(int res = 64) const;
};

struct ProjectOptions {
  BoundaryPolicy policy = BoundaryPolicy::Shrink;
  bool parallel = true;
};

// LowPass(N) = K_N * f; Band(N) = LowPass(N) - LowPass(N/2);
// HighPass(N) = f - LowPass(N).
GridField project(const GridField& f, const MollifierFamily& fam, BandKind kind, double N,
                  const ProjectOptions& opt = {});

// kernel half-widths in nodes at parameter N on spacing h
int kernel_halfwidth_xy(const MollifierFamily& fam, double N, double h);
int kernel_halfwidth_z(const MollifierFamily& fam, double N, double h);

// margins a shrink-policy low pass would add on the given spec
std::array<int, 3> lowpass_margins(const MollifierFamily& fam, double N, const GridSpec& spec);

// serial reference kept for testing; identical output to the OMP path
GridField lowpass_serial(const GridField& f, const MollifierFamily& fam, double N,
                         BoundaryPolicy policy);
GridField lowpass_omp(const GridField& f, const MollifierFamily& fam, double N,
                      BoundaryPolicy policy);

}  // namespace heis
