#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnnlab/dense.hpp"
#include "gnnlab/graph.hpp"

namespace gnnlab {

enum class OperatorKind {
  sym_norm,   // D^{-1/2} A D^{-1/2}
  row_norm,   // D^{-1} A
  raw_adj,    // A
  neigh_avg,  // D^{-1} A; pair with a self-looped graph for a neighborhood mean
  custom,     // assembled from explicit entries (perturbed operators, tests)
};

std::string_view to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(std::string_view name);

struct Entry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Sparse n x n operator in row-major CSR form. Column indices are sorted and
/// unique within each row; all values are finite.
class PropagationOperator {
 public:
  PropagationOperator() = default;

  static PropagationOperator identity(std::size_t n);
  static PropagationOperator zero(std::size_t n);
  /// Duplicate (row, col) entries are summed; explicit zeros are kept.
  static PropagationOperator from_entries(std::size_t n, std::vector<Entry> entries,
                                          OperatorKind kind = OperatorKind::custom);

  std::size_t size() const noexcept { return n_; }
  OperatorKind kind() const noexcept { return kind_; }
  std::size_t nnz() const noexcept { return cols_.size(); }
  std::size_t row_nnz(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t max_row_nnz() const;
  std::size_t max_col_nnz() const;

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_.data() + offsets_[i], cols_.data() + offsets_[i + 1]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {vals_.data() + offsets_[i], vals_.data() + offsets_[i + 1]};
  }
  /// Entry lookup by binary search; zero outside the support.
  double at(std::size_t i, std::size_t j) const;

  /// op * X
  Matrix apply(const Matrix& x) const;
  /// op^T * X
  Matrix apply_transpose(const Matrix& x) const;

  PropagationOperator transpose() const;
  std::vector<Entry> entries() const;

  friend bool operator==(const PropagationOperator&, const PropagationOperator&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
  OperatorKind kind_ = OperatorKind::custom;
};

/// Builds the operator of `kind` from g's adjacency exactly as stored; degrees
/// include self-loops iff g has them. Throws DegeneracyError naming the first
/// zero-degree node when a normalized kind is requested.
PropagationOperator propagation_operator(const SparseGraph& g, OperatorKind kind);

Matrix apply_operator(const PropagationOperator& op, const Matrix& x);

/// Coefficients theta_1..theta_k of a polynomial filter with |theta_j| <= beta.
struct FilterCoefficients {
  std::vector<double> theta;
  double beta = 1.0;

  std::size_t order() const noexcept { return theta.size(); }
  /// Throws InputError when k = 0 or some |theta_j| exceeds beta.
  void validate() const;
  /// Smallest beta that admits theta.
  static FilterCoefficients tight(std::vector<double> theta);
};

/// sum_j theta_j op^j X, by repeated application; op^j is never formed.
Matrix polynomial_propagate(const PropagationOperator& op, const FilterCoefficients& coeffs,
                            const Matrix& x);

/// max_i sum_j |op_ij|
double row_sum_norm(const PropagationOperator& op);

double frobenius_distance(const PropagationOperator& a, const PropagationOperator& b);

}  // namespace gnnlab
