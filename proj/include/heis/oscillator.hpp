#pragma once

#include <string>
#include <vector>

#include "heis/grid.hpp"

namespace heis {

// Explicit automorphic immersion f : H -> R^8, invariant under the right
// action of the integer lattice:
//   (cos 2pi x, sin 2pi x, cos 2pi y, sin 2pi y, Re G0, Im G0, Re G1, Im G1)
// where G_j(x,y,z) = sum_n exp(-2pi (y+n+j/2)^2) exp(4pi i (z + (n+j/2) x)).
// Each G_j is a weight-2 theta section; the two half characteristics have
// no common zero, so Zf never vanishes and the circle blocks make
// |Xf ^ Yf ^ Zf| >= (2pi)^2 |Zf| pointwise.
struct AutomorphicMap {
  int dim_f = 8;
  int theta_window = 8;     // terms n in [round(-y)-W, round(-y)+W]
  double theta_weight = 1.0;  // relative weight of the theta block

  void value(const Point& p, double* out) const;  // dim_f values
  // mixed coordinate partial d_x^a d_y^b d_z^c of one component
  double partial(int comp, const Point& p, int a, int b, int c) const;

  AnalyticField as_field() const;
};

// word over {X,Y,Z} expanded into sum coef * y^k * d_x^a d_y^b d_z^c
struct OpTerm {
  double coef;
  int ypow, a, b, c;
};
std::vector<OpTerm> expand_word(const std::string& word);

int veronese_dim(int mf);
// (v, sym(v (x) v)) with off-diagonal entries scaled by sqrt(2) so the
// Euclidean norm matches the tensor Frobenius norm
void veronese(const double* v, int mf, double* out);

struct Phi0Options {
  int grid_n = 33;              // fundamental-domain certification grid
  double automorphy_tol = 1e-10;
  double immersion_floor = 1e-4;
  int norm_grid_n = 9;
  int max_bj = 8;
};

struct Phi0 {
  AutomorphicMap f;
  int m = 0;  // dim_f + dim_f(dim_f+1)/2
  double c_f = 0.0;                // min |Xf ^ Yf ^ Zf| over the grid
  double c0 = 0.0;                 // min 6-wedge of phi0 over the grid
  double c0_refined = 0.0;         // same on a once-refined grid
  double automorphy_residual = 0.0;
  std::vector<double> Bj;          // measured C^j norms, j = 0..max_bj

  void value(const Point& p, double* out) const;
  void word_deriv(const std::string& word, const Point& p, double* out) const;
  AnalyticField as_field() const;
};

double automorphy_residual(const AnalyticField& f, int grid_n);

Phi0 build_phi0(const AutomorphicMap& f, const Phi0Options& opt = {});

// phi_n(p) = A^n phi0(delta_{A^-n} p); derivatives follow the chain rule
// X(phi0 o delta_l) = l (X phi0) o delta_l (and l^2 for Z).
void rescaled_phi0(const Phi0& phi, int n, double A, const Point& p, double* out);
AnalyticField rescaled_phi0_field(const Phi0& phi, int n, double A);

}  // namespace heis
