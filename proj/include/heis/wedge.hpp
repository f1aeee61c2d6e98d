#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace heis {

// Gram matrix of k vectors of dimension D (row-major stack).
inline Eigen::MatrixXd gram(std::span<const double> stack, int k, int D) {
  Eigen::MatrixXd g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      double s = 0.0;
      for (int d = 0; d < D; ++d) s += stack[i * D + d] * stack[j * D + d];
      g(i, j) = g(j, i) = s;
    }
  return g;
}

// |v_1 ^ ... ^ v_k|^2 = det(v_i . v_j)  (Cauchy-Binet)
inline double wedge_norm_sq(std::span<const double> stack, int k, int D) {
  if (k > D) return 0.0;
  if (k == 0) return 1.0;
  return gram(stack, k, D).determinant();
}

inline double wedge_norm(std::span<const double> stack, int k, int D) {
  double s = wedge_norm_sq(stack, k, D);
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

// <u_1^...^u_k, v_1^...^v_k> = det(u_i . v_j)  (depolarised Cauchy-Binet)
inline double wedge_inner(std::span<const double> u, std::span<const double> v, int k, int D) {
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int d = 0; d < D; ++d) s += u[i * D + d] * v[j * D + d];
      m(i, j) = s;
    }
  return m.determinant();
}

}  // namespace heis
