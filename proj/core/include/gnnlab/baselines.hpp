#pragma once

#include <cstddef>

#include "gnnlab/dense.hpp"
#include "gnnlab/graph.hpp"
#include "gnnlab/mask.hpp"

namespace gnnlab {

struct CgOptions {
  double rel_tol = 1e-8;
  /// 0 means 10 n.
  std::size_t max_iter = 0;
};

/// Minimizes sum_{i in Omega} (y_i - f_i)^2 + lambda f'Lf with L = D - A of
/// the loop-free graph, by conjugate gradient on (Diag(omega) + lambda L) f = omega*y.
Vector tikhonov_fit(const SparseGraph& g, const Vector& y, const MaskVector& mask, double lambda,
                    const CgOptions& cg = {});

/// Iterates f <- alpha P f + (1 - alpha) y_Omega with P the row-normalized
/// self-looped adjacency, re-clamping observed nodes after every sweep.
Vector label_propagation(const SparseGraph& g, const Vector& y, const MaskVector& mask, double alpha,
                         std::size_t iters);

}  // namespace gnnlab
