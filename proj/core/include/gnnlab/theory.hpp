#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gnnlab/dense.hpp"
#include "gnnlab/propagation.hpp"

namespace gnnlab {

/// Boolean support of |op| + |op|^2 + ... + |op|^depth, one sorted row per node.
std::vector<std::vector<std::size_t>> receptive_supports(const PropagationOperator& op, std::size_t depth);

/// Tightest m for which every nodal output reads at most m feature rows and
/// every feature row reaches at most m outputs, at the given GCN depth.
std::size_t receptive_field(const PropagationOperator& op, std::size_t depth);

/// m_T^depth with m_T the larger of the max row and column nonzero counts; an
/// upper bound on receptive_field for operators with a full diagonal.
double receptive_field_upper_bound(const PropagationOperator& op, std::size_t depth);

/// Color classes of nodal losses: equal colors never share an input row.
struct DependencyPartition {
  std::vector<std::size_t> colors;
  std::size_t r = 0;
  std::size_t m = 0;
  std::size_t dep_degree_max = 0;

  /// m(m - 1) + 1
  std::size_t color_bound() const noexcept { return m * (m > 0 ? m - 1 : 0) + 1; }
};

/// Greedy smallest-available coloring in ascending node order of the graph
/// joining i and j whenever their receptive supports intersect.
DependencyPartition dependency_partition(const PropagationOperator& op, std::size_t depth);

/// Upper bound on the sup-norm metric entropy of the GNN class:
/// (d^2 L1 + L1 + s + 1) log( 2 L1 (L1 + L2 + 2) (t v 1)^L1 d^L1 / delta * prod_k (p_k + 1)^2 ).
/// `widths` holds p_0..p_{L2+1}.
double entropy_bound(double delta, std::size_t d, std::size_t L1, std::size_t L2,
                     const std::vector<std::size_t>& widths, std::size_t s, double t_rownorm);

/// (d^2 L1 + s) [ log(n L1 (L1 + L2)) + (L1 + 1) log(t v d) + L2 log s ].
/// Requires s >= 2 and L1, L2 >= 1.
double kappa_n(double n, std::size_t d, std::size_t L1, std::size_t L2, std::size_t s, double t_rownorm);

/// tau sqrt(d_T + d_S) sum_i i |theta_i| A^{i-1}, where tau = |T - S|_F, d_X is
/// the max row nonzero count and A the larger row-sum norm.
double mismatch_bound(const PropagationOperator& t_op, const PropagationOperator& s_op,
                      const FilterCoefficients& coeffs);

/// op plus a Gaussian perturbation of its stored entries, rescaled so that
/// |T - S|_F = tau exactly. `extra_per_row` new off-support entries per row
/// are included in the perturbation.
PropagationOperator perturb_operator(const PropagationOperator& op, double tau, std::uint64_t seed,
                                     std::size_t extra_per_row = 0);

struct MismatchCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Measures max_j |(sum_i theta_i (T^i - S^i) X)_j|_inf against mismatch_bound.
/// X must lie in [0, 1].
MismatchCheck verify_mismatch(const PropagationOperator& t_op, const PropagationOperator& s_op,
                              const FilterCoefficients& coeffs, const Matrix& x);

/// Composition smoothness: alpha_star_i = alpha_i prod_{l > i} min(alpha_l, 1).
struct SmoothnessSpec {
  std::vector<std::size_t> d_vec;
  std::vector<std::size_t> t_vec;
  std::vector<double> alpha_vec;
  std::vector<double> alpha_star;

  std::size_t depth() const noexcept { return alpha_vec.empty() ? 0 : alpha_vec.size() - 1; }  // q
};

SmoothnessSpec effective_smoothness(SmoothnessSpec spec);

/// max_i -2 alpha*_i / (2 alpha*_i + t_i): the log-log slope of the rate.
double predicted_rate_exponent(const SmoothnessSpec& spec);

/// (m^2 log^3 n / pi) max_i n^{-2 alpha*_i / (2 alpha*_i + t_i)}, constant dropped.
double predicted_rate(const SmoothnessSpec& spec, double n, double m, double pi);

/// Stochastic terms of the oracle inequality with unit constants; shape only.
struct OracleTermsShape {
  double lower;  // m^2 F^2 log N / (eps n) + delta F
  double upper;  // (1 + eps) m^2 F^2 log N / (eps n pi) + F delta / sqrt(pi) + F^2 / N
};

OracleTermsShape oracle_terms_shape(double m, double f_bound, double log_covering, double eps, double n, double pi,
                                    double delta);

}  // namespace gnnlab
