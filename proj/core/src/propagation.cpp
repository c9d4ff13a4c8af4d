#include "gnnlab/propagation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::sym_norm: return "sym_norm";
    case OperatorKind::row_norm: return "row_norm";
    case OperatorKind::raw_adj: return "raw_adj";
    case OperatorKind::neigh_avg: return "neigh_avg";
    case OperatorKind::custom: return "custom";
  }
  return "custom";
}

OperatorKind operator_kind_from_string(std::string_view name) {
  for (auto k : {OperatorKind::sym_norm, OperatorKind::row_norm, OperatorKind::raw_adj,
                 OperatorKind::neigh_avg, OperatorKind::custom}) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown operator kind '{}'", name));
}

PropagationOperator PropagationOperator::identity(std::size_t n) {
  std::vector<Entry> e;
  e.reserve(n);
  for (std::size_t i = 0; i < n; ++i) e.push_back({i, i, 1.0});
  return from_entries(n, std::move(e));
}

PropagationOperator PropagationOperator::zero(std::size_t n) { return from_entries(n, {}); }

PropagationOperator PropagationOperator::from_entries(std::size_t n, std::vector<Entry> entries,
                                                      OperatorKind kind) {
  for (const auto& e : entries) {
    if (e.row >= n || e.col >= n) {
      throw InputError(fmt::format("operator entry ({}, {}) out of range for n = {}", e.row, e.col, n));
    }
    if (!std::isfinite(e.value)) throw NumericError("operator entries must be finite");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  PropagationOperator op;
  op.n_ = n;
  op.kind_ = kind;
  op.offsets_.assign(n + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (!op.cols_.empty() && k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      op.vals_.back() += e.value;
      continue;
    }
    op.cols_.push_back(e.col);
    op.vals_.push_back(e.value);
    ++op.offsets_[e.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) op.offsets_[i + 1] += op.offsets_[i];
  return op;
}

std::size_t PropagationOperator::max_row_nnz() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i < n_; ++i) best = std::max(best, row_nnz(i));
  return best;
}

std::size_t PropagationOperator::max_col_nnz() const {
  std::vector<std::size_t> count(n_, 0);
  for (auto c : cols_) ++count[c];
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

double PropagationOperator::at(std::size_t i, std::size_t j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return vals_[offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
}

Matrix PropagationOperator::apply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n_) {
    throw InputError(fmt::format("apply: operator is {0}x{0} but input has {1} rows", n_, x.rows()));
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < n_; ++i) {
    auto row = out.row(static_cast<Eigen::Index>(i));
    for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      row.noalias() += vals_[p] * x.row(static_cast<Eigen::Index>(cols_[p]));
    }
  }
  return out;
}

Matrix PropagationOperator::apply_transpose(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n_) {
    throw InputError(fmt::format("apply_transpose: operator is {0}x{0} but input has {1} rows", n_, x.rows()));
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < n_; ++i) {
    auto src = x.row(static_cast<Eigen::Index>(i));
    for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      out.row(static_cast<Eigen::Index>(cols_[p])).noalias() += vals_[p] * src;
    }
  }
  return out;
}

std::vector<Entry> PropagationOperator::entries() const {
  std::vector<Entry> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) out.push_back({i, cols_[p], vals_[p]});
  }
  return out;
}

PropagationOperator PropagationOperator::transpose() const {
  auto e = entries();
  for (auto& x : e) std::swap(x.row, x.col);
  return from_entries(n_, std::move(e), kind_);
}

PropagationOperator propagation_operator(const SparseGraph& g, OperatorKind kind) {
  const std::size_t n = g.size();
  if (n == 0) throw InputError("propagation_operator: empty graph");
  if (kind == OperatorKind::custom) throw InputError("propagation_operator: custom operators have no graph recipe");

  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = static_cast<double>(g.degree(static_cast<NodeId>(i)));
    if (kind != OperatorKind::raw_adj && deg[i] == 0.0) {
      throw DegeneracyError(
          fmt::format("node {} has degree 0; {} is undefined (add self-loops?)", i, to_string(kind)), i);
    }
  }
  std::vector<Entry> e;
  e.reserve(g.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(static_cast<NodeId>(i))) {
      double v = 1.0;
      switch (kind) {
        case OperatorKind::sym_norm: v = 1.0 / std::sqrt(deg[i] * deg[j]); break;
        case OperatorKind::row_norm:
        case OperatorKind::neigh_avg: v = 1.0 / deg[i]; break;
        default: break;
      }
      e.push_back({i, j, v});
    }
  }
  return PropagationOperator::from_entries(n, std::move(e), kind);
}

Matrix apply_operator(const PropagationOperator& op, const Matrix& x) { return op.apply(x); }

void FilterCoefficients::validate() const {
  if (theta.empty()) throw InputError("filter coefficients: order k must be at least 1");
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!std::isfinite(theta[j]) || std::abs(theta[j]) > beta) {
      throw InputError(fmt::format("filter coefficients: |theta_{}| = {} exceeds beta = {}", j + 1,
                                   std::abs(theta[j]), beta));
    }
  }
}

FilterCoefficients FilterCoefficients::tight(std::vector<double> theta) {
  double b = 0.0;
  for (double t : theta) b = std::max(b, std::abs(t));
  return {std::move(theta), b};
}

Matrix polynomial_propagate(const PropagationOperator& op, const FilterCoefficients& coeffs,
                            const Matrix& x) {
  coeffs.validate();
  Matrix power = x;
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (double theta : coeffs.theta) {
    power = op.apply(power);
    out.noalias() += theta * power;
  }
  return out;
}

double row_sum_norm(const PropagationOperator& op) {
  double best = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i) {
    double s = 0.0;
    for (double v : op.row_values(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double frobenius_distance(const PropagationOperator& a, const PropagationOperator& b) {
  if (a.size() != b.size()) {
    throw InputError(fmt::format("frobenius_distance: sizes {} and {} differ", a.size(), b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto ac = a.row_cols(i), bc = b.row_cols(i);
    auto av = a.row_values(i), bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      double diff;
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        diff = av[p++];
      } else if (p == ac.size() || bc[q] < ac[p]) {
        diff = -bv[q++];
      } else {
        diff = av[p++] - bv[q++];
      }
      acc += diff * diff;
    }
  }
  return std::sqrt(acc);
}

}  // namespace gnnlab
