#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gnnlab/dense.hpp"

namespace gnnlab {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected, unweighted graph stored as sorted adjacency lists (CSR).
///
/// Invariants: adjacency is symmetric, free of duplicates, ids lie in
/// [0, n), and every node lists itself iff has_self_loops() is true.
class SparseGraph {
 public:
  SparseGraph() = default;

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  bool has_self_loops() const noexcept { return self_loops_; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {ids_.data() + offsets_[i], ids_.data() + offsets_[i + 1]};
  }
  /// Number of stored neighbors, self included when looped.
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t max_degree() const;
  /// Total stored adjacency entries (2|E| plus n when looped).
  std::size_t nnz() const noexcept { return ids_.size(); }
  /// Undirected edges with u < v; self-loops are not reported.
  std::vector<Edge> edges() const;
  std::size_t num_edges() const;
  bool has_edge(NodeId u, NodeId v) const;

  SparseGraph with_self_loops() const;
  SparseGraph without_self_loops() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  friend SparseGraph build_graph(std::size_t, std::span<const Edge>, bool);

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> ids_;
  bool self_loops_ = false;
};

/// Deduplicates and symmetrizes `edges`. Explicit (i,i) pairs are dropped
/// unless `add_self_loops` is set, in which case every node gets one.
SparseGraph build_graph(std::size_t n, std::span<const Edge> edges, bool add_self_loops);

/// Euclidean k-nearest-neighbor graph, symmetrized by union, without
/// self-loops. Distance ties go to the smaller node id. One point per row.
SparseGraph knn_graph(const Matrix& points, std::size_t k);

/// Parses "u v" pairs, one per line; '#' starts a comment.
std::vector<Edge> read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const SparseGraph& g);

/// Combinatorial Laplacian quadratic form f'(D - A)f / |f|^2 over the
/// loop-free adjacency. Returns 0 for the zero vector.
double laplacian_energy(const SparseGraph& g, const Vector& f);

}  // namespace gnnlab
