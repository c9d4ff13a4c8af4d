#include "gnnlab/graph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

std::size_t SparseGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i < size(); ++i) best = std::max(best, degree(static_cast<NodeId>(i)));
  return best;
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (NodeId j : neighbors(static_cast<NodeId>(i))) {
      if (j > i) out.push_back({static_cast<NodeId>(i), j});
    }
  }
  return out;
}

std::size_t SparseGraph::num_edges() const {
  std::size_t loops = self_loops_ ? size() : 0;
  return (nnz() - loops) / 2;
}

bool SparseGraph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

SparseGraph SparseGraph::with_self_loops() const {
  if (self_loops_) return *this;
  auto e = edges();
  return build_graph(size(), e, true);
}

SparseGraph SparseGraph::without_self_loops() const {
  if (!self_loops_) return *this;
  auto e = edges();
  return build_graph(size(), e, false);
}

SparseGraph build_graph(std::size_t n, std::span<const Edge> edges, bool add_self_loops) {
  if (n == 0) throw InputError("build_graph: node count must be positive");
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw InputError(fmt::format("build_graph: edge ({}, {}) out of range for n = {}", u, v, n));
    }
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  SparseGraph g;
  g.self_loops_ = add_self_loops;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adj[i];
    if (add_self_loops) row.push_back(static_cast<NodeId>(i));
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.offsets_[i + 1] = g.offsets_[i] + row.size();
  }
  g.ids_.reserve(g.offsets_[n]);
  for (auto& row : adj) g.ids_.insert(g.ids_.end(), row.begin(), row.end());
  return g;
}

SparseGraph knn_graph(const Matrix& points, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw InputError("knn_graph: k must be at least 1");
  if (k >= n) throw InputError(fmt::format("knn_graph: k = {} must be smaller than n = {}", k, n));
  if (!points.allFinite()) throw InputError("knn_graph: coordinates must be finite");

  std::vector<Edge> edges;
  edges.reserve(n * k);
  std::vector<std::pair<double, NodeId>> dist(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[c++] = {(points.row(i) - points.row(j)).squaredNorm(), static_cast<NodeId>(j)};
    }
    // pair ordering breaks distance ties by the smaller id
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t r = 0; r < k; ++r) edges.push_back({static_cast<NodeId>(i), dist[r].second});
  }
  return build_graph(n, edges, false);
}

std::vector<Edge> read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long long u = 0;
    long long v = 0;
    if (!(ss >> u)) continue;
    if (!(ss >> v) || u < 0 || v < 0) {
      throw FormatError(fmt::format("edge list line {}: expected two non-negative ids", lineno));
    }
    std::string rest;
    if (ss >> rest) throw FormatError(fmt::format("edge list line {}: trailing token '{}'", lineno, rest));
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return edges;
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
  out << "# n " << g.size() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

double laplacian_energy(const SparseGraph& g, const Vector& f) {
  if (static_cast<std::size_t>(f.size()) != g.size()) {
    throw InputError("laplacian_energy: signal length does not match graph");
  }
  const double norm2 = f.squaredNorm();
  if (norm2 == 0.0) return 0.0;
  double quad = 0.0;
  for (const auto& [u, v] : g.edges()) {
    const double diff = f[u] - f[v];
    quad += diff * diff;
  }
  return quad / norm2;
}

}  // namespace gnnlab
