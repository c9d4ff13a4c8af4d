#include "gnnlab/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"
#include "gnnlab/propagation.hpp"

namespace gnnlab {

namespace {

void check_inputs(const SparseGraph& g, const Vector& y, const MaskVector& mask, const char* who) {
  if (static_cast<std::size_t>(y.size()) != g.size() || mask.size() != g.size()) {
    throw InputError(fmt::format("{}: response/mask length does not match graph size {}", who, g.size()));
  }
  if (mask.count() == 0) throw InputError(fmt::format("{}: mask has no observed node", who));
}

}  // namespace

Vector tikhonov_fit(const SparseGraph& g, const Vector& y, const MaskVector& mask, double lambda,
                    const CgOptions& cg) {
  check_inputs(g, y, mask, "tikhonov_fit");
  if (!(lambda >= 0.0)) throw InputError("tikhonov_fit: lambda must be non-negative");
  const auto n = static_cast<Eigen::Index>(g.size());
  const SparseGraph plain = g.without_self_loops();

  Vector diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag[i] = (mask.observed(static_cast<std::size_t>(i)) ? 1.0 : 0.0) +
              lambda * static_cast<double>(plain.degree(static_cast<NodeId>(i)));
  }
  auto apply = [&](const Vector& f) {
    Vector out = diag.cwiseProduct(f);
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (NodeId j : plain.neighbors(static_cast<NodeId>(i))) acc += f[j];
      out[i] -= lambda * acc;
    }
    return out;
  };

  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = mask.observed(static_cast<std::size_t>(i)) ? y[i] : 0.0;

  Vector f = Vector::Zero(n);
  Vector r = rhs;
  Vector p = r;
  double rr = r.squaredNorm();
  const double target = cg.rel_tol * rhs.norm();
  const std::size_t cap = cg.max_iter ? cg.max_iter : 10 * static_cast<std::size_t>(n);
  for (std::size_t it = 0; it < cap && std::sqrt(rr) > target; ++it) {
    const Vector ap = apply(p);
    const double pap = p.dot(ap);
    if (pap <= 0.0) break;
    const double step = rr / pap;
    f += step * p;
    r -= step * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (std::sqrt(rr) > target) {
    throw NumericError(fmt::format("tikhonov_fit: CG stopped at relative residual {:.3e} after {} iterations",
                                   std::sqrt(rr) / rhs.norm(), cap));
  }
  return f;
}

Vector label_propagation(const SparseGraph& g, const Vector& y, const MaskVector& mask, double alpha,
                         std::size_t iters) {
  check_inputs(g, y, mask, "label_propagation");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InputError("label_propagation: alpha must lie in [0, 1)");
  const auto P = propagation_operator(g.with_self_loops(), OperatorKind::row_norm);
  const auto n = static_cast<Eigen::Index>(g.size());

  Matrix seed = Matrix::Zero(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask.observed(static_cast<std::size_t>(i))) seed(i, 0) = y[i];
  }
  Matrix f = seed;
  for (std::size_t it = 0; it < iters; ++it) {
    Matrix next = alpha * P.apply(f) + (1.0 - alpha) * seed;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask.observed(static_cast<std::size_t>(i))) next(i, 0) = y[i];
    }
    const double change = (next - f).cwiseAbs().maxCoeff();
    f = std::move(next);
    if (change < 1e-9) break;
  }
  return f.col(0);
}

}  // namespace gnnlab
