#include "gnnlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

namespace {

/// Rows of the union of supports of op^1..op^depth, by frontier expansion.
std::vector<std::vector<std::size_t>> hop_closure(const PropagationOperator& op, std::size_t depth) {
  const std::size_t n = op.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> mark(n, 0);
  std::vector<std::size_t> frontier, next;
  std::size_t stamp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // frontier = support of row i of op^h; mark = membership in the union
    frontier.assign(1, i);
    ++stamp;
    auto& row = out[i];
    for (std::size_t h = 1; h <= depth && !frontier.empty(); ++h) {
      next.clear();
      for (std::size_t u : frontier) {
        auto cols = op.row_cols(u);
        auto vals = op.row_values(u);
        for (std::size_t p = 0; p < cols.size(); ++p) {
          if (vals[p] == 0.0) continue;
          next.push_back(cols[p]);
        }
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      for (std::size_t v : next) {
        if (mark[v] != stamp) {
          mark[v] = stamp;
          row.push_back(v);
        }
      }
      frontier.swap(next);
    }
    std::sort(row.begin(), row.end());
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> receptive_supports(const PropagationOperator& op, std::size_t depth) {
  if (depth < 1) throw InputError("receptive field: depth must be at least 1");
  return hop_closure(op, depth);
}

std::size_t receptive_field(const PropagationOperator& op, std::size_t depth) {
  const auto rows = receptive_supports(op, depth);
  std::vector<std::size_t> col_count(op.size(), 0);
  std::size_t m = 0;
  for (const auto& r : rows) {
    m = std::max(m, r.size());
    for (auto j : r) ++col_count[j];
  }
  for (auto c : col_count) m = std::max(m, c);
  return m;
}

double receptive_field_upper_bound(const PropagationOperator& op, std::size_t depth) {
  if (depth < 1) throw InputError("receptive field: depth must be at least 1");
  const auto mt = static_cast<double>(std::max(op.max_row_nnz(), op.max_col_nnz()));
  return std::pow(mt, static_cast<double>(depth));
}

DependencyPartition dependency_partition(const PropagationOperator& op, std::size_t depth) {
  const auto rows = receptive_supports(op, depth);
  const std::size_t n = op.size();
  std::vector<std::vector<std::size_t>> readers(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : rows[i]) readers[j].push_back(i);

  DependencyPartition part;
  for (const auto& r : rows) part.m = std::max(part.m, r.size());
  for (const auto& c : readers) part.m = std::max(part.m, c.size());

  part.colors.assign(n, 0);
  std::vector<std::size_t> seen(n, 0);       // neighbor stamp
  std::vector<std::size_t> used(n + 1, 0);   // color stamp
  std::size_t stamp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++stamp;
    std::size_t degree = 0;
    for (auto k : rows[i]) {
      for (auto j : readers[k]) {
        if (j == i || seen[j] == stamp) continue;
        seen[j] = stamp;
        ++degree;
        if (j < i) used[part.colors[j]] = stamp;
      }
    }
    part.dep_degree_max = std::max(part.dep_degree_max, degree);
    std::size_t c = 0;
    while (used[c] == stamp) ++c;
    part.colors[i] = c;
    part.r = std::max(part.r, c + 1);
  }
  return part;
}

double entropy_bound(double delta, std::size_t d, std::size_t L1, std::size_t L2,
                     const std::vector<std::size_t>& widths, std::size_t s, double t_rownorm) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError(fmt::format("entropy_bound: delta = {} outside (0, 1]", delta));
  if (L1 < 1) throw InputError("entropy_bound: L1 must be at least 1");
  if (widths.size() != L2 + 2) {
    throw InputError(fmt::format("entropy_bound: expected {} widths for L2 = {}, got {}", L2 + 2, L2, widths.size()));
  }
  const double dd = static_cast<double>(d), l1 = static_cast<double>(L1), l2 = static_cast<double>(L2);
  double log_arg = std::log(2.0 * l1 * (l1 + l2 + 2.0)) + l1 * std::log(std::max(t_rownorm, 1.0)) +
                   l1 * std::log(dd) - std::log(delta);
  for (auto p : widths) log_arg += 2.0 * std::log(static_cast<double>(p) + 1.0);
  return (dd * dd * l1 + l1 + static_cast<double>(s) + 1.0) * log_arg;
}

double kappa_n(double n, std::size_t d, std::size_t L1, std::size_t L2, std::size_t s, double t_rownorm) {
  if (!(n > 0.0)) throw InputError("kappa_n: n must be positive");
  if (d < 1) throw InputError("kappa_n: d must be positive");
  if (L1 < 1) throw InputError("kappa_n: requires L1 >= 1");
  if (L2 < 1) throw InputError("kappa_n: requires L2 >= 1");
  if (s < 2) throw InputError("kappa_n: requires s >= 2");
  if (!(t_rownorm > 0.0)) throw InputError("kappa_n: row-sum norm must be positive");
  const double dd = static_cast<double>(d), l1 = static_cast<double>(L1), l2 = static_cast<double>(L2);
  const double sd = static_cast<double>(s);
  return (dd * dd * l1 + sd) *
         (std::log(n * l1 * (l1 + l2)) + (l1 + 1.0) * std::log(std::max(t_rownorm, dd)) + l2 * std::log(sd));
}

double mismatch_bound(const PropagationOperator& t_op, const PropagationOperator& s_op,
                      const FilterCoefficients& coeffs) {
  if (t_op.size() != s_op.size()) throw InputError("mismatch_bound: operator sizes differ");
  coeffs.validate();
  const double tau = frobenius_distance(t_op, s_op);
  const double sparsity = static_cast<double>(t_op.max_row_nnz() + s_op.max_row_nnz());
  const double a = std::max(row_sum_norm(t_op), row_sum_norm(s_op));
  double series = 0.0;
  double power = 1.0;
  for (std::size_t i = 0; i < coeffs.order(); ++i) {
    series += static_cast<double>(i + 1) * std::abs(coeffs.theta[i]) * power;
    power *= a;
  }
  return tau * std::sqrt(sparsity) * series;
}

PropagationOperator perturb_operator(const PropagationOperator& op, double tau, std::uint64_t seed,
                                     std::size_t extra_per_row) {
  if (!(tau >= 0.0)) throw InputError("perturb_operator: tau must be nonnegative");
  const std::size_t n = op.size();
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n == 0 ? 0 : n - 1);
  auto entries = op.entries();
  std::vector<Entry> delta;
  delta.reserve(entries.size() + n * extra_per_row);
  for (const auto& e : entries) delta.push_back({e.row, e.col, gauss(rng)});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < extra_per_row; ++k) delta.push_back({i, pick(rng), gauss(rng)});
  double norm2 = 0.0;
  for (const auto& e : delta) norm2 += e.value * e.value;
  const double scale = norm2 > 0.0 ? tau / std::sqrt(norm2) : 0.0;
  for (auto& e : delta) e.value *= scale;
  // duplicates are summed by from_entries, so rescale after assembly
  auto d_op = PropagationOperator::from_entries(n, delta, OperatorKind::custom);
  const double actual = frobenius_distance(d_op, PropagationOperator::zero(n));
  if (actual > 0.0) {
    auto de = d_op.entries();
    for (auto& e : de) e.value *= tau / actual;
    d_op = PropagationOperator::from_entries(n, std::move(de), OperatorKind::custom);
  }
  auto sum = op.entries();
  const auto de = d_op.entries();
  sum.insert(sum.end(), de.begin(), de.end());
  return PropagationOperator::from_entries(n, std::move(sum), OperatorKind::custom);
}

MismatchCheck verify_mismatch(const PropagationOperator& t_op, const PropagationOperator& s_op,
                              const FilterCoefficients& coeffs, const Matrix& x) {
  if (t_op.size() != s_op.size()) throw InputError("verify_mismatch: operator sizes differ");
  if (x.size() > 0 && (x.minCoeff() < 0.0 || x.maxCoeff() > 1.0)) {
    throw InputError("verify_mismatch: features must lie in [0, 1]");
  }
  const Matrix diff = polynomial_propagate(t_op, coeffs, x) - polynomial_propagate(s_op, coeffs, x);
  MismatchCheck out;
  out.lhs = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
  out.rhs = mismatch_bound(t_op, s_op, coeffs);
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

SmoothnessSpec effective_smoothness(SmoothnessSpec spec) {
  const auto len = spec.alpha_vec.size();
  if (len == 0) throw InputError("effective_smoothness: need at least one stage");
  if (spec.t_vec.size() != len) throw InputError("effective_smoothness: |t| must equal |alpha|");
  if (!spec.d_vec.empty() && spec.d_vec.size() != len) throw InputError("effective_smoothness: |d| must equal |alpha|");
  for (double a : spec.alpha_vec) {
    if (!(a > 0.0)) throw InputError("effective_smoothness: smoothness exponents must be positive");
  }
  spec.alpha_star.assign(len, 0.0);
  double tail = 1.0;
  for (std::size_t i = len; i-- > 0;) {
    spec.alpha_star[i] = spec.alpha_vec[i] * tail;
    tail *= std::min(spec.alpha_vec[i], 1.0);
  }
  return spec;
}

double predicted_rate_exponent(const SmoothnessSpec& spec) {
  if (spec.alpha_star.size() != spec.t_vec.size() || spec.alpha_star.empty()) {
    throw InputError("predicted_rate: call effective_smoothness first");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.alpha_star.size(); ++i) {
    const double a = spec.alpha_star[i];
    best = std::max(best, -2.0 * a / (2.0 * a + static_cast<double>(spec.t_vec[i])));
  }
  return best;
}

double predicted_rate(const SmoothnessSpec& spec, double n, double m, double pi) {
  if (!(n >= 2.0)) throw InputError("predicted_rate: n must be at least 2");
  if (!(pi > 0.0 && pi <= 1.0)) throw InputError("predicted_rate: pi outside (0, 1]");
  const double ln = std::log(n);
  return m * m * ln * ln * ln / pi * std::pow(n, predicted_rate_exponent(spec));
}

OracleTermsShape oracle_terms_shape(double m, double f_bound, double log_covering, double eps, double n, double pi,
                                    double delta) {
  if (!(eps > 0.0 && eps <= 1.0) || !(n > 0.0) || !(pi > 0.0 && pi <= 1.0)) {
    throw InputError("oracle_terms_shape: parameters out of range");
  }
  const double core = m * m * f_bound * f_bound * log_covering / (eps * n);
  return {core + delta * f_bound,
          (1.0 + eps) * core / pi + f_bound * delta / std::sqrt(pi) + f_bound * f_bound / std::exp(log_covering)};
}

}  // namespace gnnlab
