#pragma once

#include "heis/grid.hpp"

namespace heis {

struct ScaledNorm {
  enum class Kind { Ck, CkAlpha };
  Kind kind = Kind::Ck;
  int k = 0;
  double alpha = 0.5;
  double R = 1.0;
  static ScaledNorm Ck(int k, double R) { return {Kind::Ck, k, 0.5, R}; }
  static ScaledNorm CkAlpha(int k, double alpha, double R) { return {Kind::CkAlpha, k, alpha, R}; }
};

struct HolderOptions {
  int random_pairs = 10000;
  std::uint64_t seed = 2024;
  // pairs drawn with CC distance in [h, L/2]; all nearest-neighbour pairs
  // are always included
};

// sum_{j<=k} R^j sup|grad^j f| (+ R^{k+alpha} Holder seminorm of grad^k f),
// sup over valid grid nodes, Holder quotient over sampled node pairs.
double norm(const GridField& f, const ScaledNorm& n, const HolderOptions& opt = {});

// Holder seminorm estimator of a field (used on gradient stacks); monotone
// in the number of sampled pairs.
double holder_seminorm(const GridField& f, double alpha, const HolderOptions& opt = {});

}  // namespace heis
