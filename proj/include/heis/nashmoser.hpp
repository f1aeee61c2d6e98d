#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heis/frames.hpp"
#include "heis/grid.hpp"
#include "heis/mollifier.hpp"

namespace heis {

// (X phi . X psi, Y phi . Y psi) as a 2-component field
GridField bform(const GridField& phi, const GridField& psi, bool parallel = true);
// same with precomputed derivative stacks
GridField bform_from(const GridField& phix, const GridField& phiy, const GridField& psix,
                     const GridField& psiy);

// Per-node linear map v -> (v.Xpsi, v.XXpsi, v.Ypsi, v.YYpsi) with cached
// Cholesky factors of the row-equilibrated Gram matrix.  Equilibration by
// (1/M, A, 1/M, A) mirrors the derivative sizes and does not change the
// minimum-norm solution.
struct ConstraintOperator {
  GridSpec spec;
  int D = 0;
  std::array<int, 3> margin{0, 0, 0};
  std::vector<GridField> rows;       // Xpsi, XXpsi, Ypsi, YYpsi
  std::array<double, 4> row_scale{1, 1, 1, 1};
  std::vector<double> chol;          // 10 packed per node (lower tri)
  double min_det = 0.0;              // min det of the equilibrated Gram
  std::array<int, 3> min_det_node{0, 0, 0};

  const double* row(int i, int ix, int iy, int iz) const { return rows[i].at(ix, iy, iz); }
};

ConstraintOperator make_constraint(const GridField& psi_smoothed, double M, double A,
                                   double det_floor, bool parallel = true);
ConstraintOperator make_constraint_from_rows(std::vector<GridField> rows,
                                             std::array<double, 4> row_scale, double det_floor,
                                             bool parallel = true);

// min-norm solution of T v = rhs per node (rhs is a 4-component field)
GridField pseudoinverse_solve(const ConstraintOperator& T, const GridField& rhs4,
                              bool parallel = true);
GridField pseudoinverse_solve_serial(const ConstraintOperator& T, const GridField& rhs4);

// phi_{<=N0} = tilde_phi + T^{-1}(0, -F_X, 0, -F_Y) with F already low-passed
GridField low_freq_solve(const GridField& tilde_phi, const ConstraintOperator& T0,
                         const GridField* F_low, bool parallel = true);

// one dyadic rung: phi_N = T^{-1}(a_N, b_N, c_N, d_N) built from the
// mollified accumulated solution and the psi band; optionally reports the
// cancellation-identity residual sup |B(phi_N, P<=N psi) +
// B(P<=N phi_<N, P_N psi) - P_N F| over the valid region.
GridField staged_sweep(const GridField& phi_prev, const ConstraintOperator& T_leqN,
                       const MollifierFamily& fam, double N, const GridField& psi_band,
                       const GridField* F_band, BoundaryPolicy policy, bool parallel = true,
                       double* ident_residual = nullptr);

struct SolverSchedule {
  double N0 = 4.0;
  double Nmax = 16.0;
  int sweeps = 8;
  int min_sweeps = 1;
  double tol = 1e-6;       // on sup|B(phi,psi)-F| / (||grad phi|| ||grad psi||)
  double det_floor = 1e-12;
  double M = 1.0;
  double A = 8.0;
  BoundaryPolicy policy = BoundaryPolicy::Clamp;
  bool parallel = true;
  std::optional<GridSpec> cert_region;  // residuals measured here (default: stencil interior)

  void validate() const;
};

struct SolveReport {
  std::vector<double> residual_history;  // sup|B(phi,psi)-F| after each sweep
  std::vector<double> ident_residuals;   // rung identity residuals, last sweep
  double low_ident_residual = 0.0;       // |B(phi_{<=N0}, P0 psi) - P0 F|
  double lfe_residual = 0.0;             // |B(tilde_phi, P0 psi)| certificate
  double final_residual = 0.0;
  double grad_phi_sup = 0.0, grad_psi_sup = 0.0;
  double cross_xy = 0.0, cross_yx = 0.0;  // ||X(phi-tilde).Ypsi||, ||Y(phi-tilde).Xpsi||
  double min_det = 0.0;
  // logged psi hypothesis constants (not gated)
  double psi_grad_min = 0.0, psi_grad_max = 0.0, psi_six_wedge_min = 0.0, psi_d2_sup = 0.0;
  int sweeps_used = 0;
  bool converged = false;
  std::string abort_reason;
};

// staged sweeps N0..Nmax plus Neumann re-injection of the residual and a
// final explicit pseudoinverse polish
struct SolveResult {
  GridField phi;
  SolveReport report;
};
SolveResult solve(const GridField& tilde_phi, const GridField& psi, const GridField* F,
                  const MollifierFamily& fam, const SolverSchedule& sched);

}  // namespace heis
