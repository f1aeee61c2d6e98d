#pragma once

#include "heis/grid.hpp"

namespace heis {

// One right-invariant field applied with 4th-order central differences.
// X = d/dx + y d/dz uses the node's own y for the twist term.
// Serial and OpenMP variants produce bitwise-identical results.
GridField apply_field_serial(const GridField& f, char op);
GridField apply_field_omp(const GridField& f, char op);

// Word applied right to left ("XY" f = X(Y f)); margins accumulate.
GridField derive(const GridField& f, const DerivOp& op, bool parallel = true);

// Same word, but biased 4th-order stencils take over near the boundary so
// the valid region does not shrink.  Used inside the staged solver where
// fields must stay full-size across sweeps.
GridField derive_extended(const GridField& f, const DerivOp& op, bool parallel = true);

// Heisenberg gradient stack (X f, Y f) as a single 2*dim field.
GridField gradient(const GridField& f, bool parallel = true);
GridField gradient_extended(const GridField& f, bool parallel = true);

double sup_norm(const GridField& f);
double sup_norm_region(const GridField& f, const GridSpec& region);

}  // namespace heis
