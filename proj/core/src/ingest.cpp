#include "gnnlab/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gnnlab/csv.hpp"
#include "gnnlab/datagen.hpp"
#include "gnnlab/errors.hpp"

namespace gnnlab {

const std::vector<std::string>& california_feature_columns() {
  static const std::vector<std::string> cols = {"MedInc",   "HouseAge", "AveRooms", "AveBedrms",
                                                "Population", "AveOccup", "Latitude", "Longitude"};
  return cols;
}

namespace {

Dataset transductive(SparseGraph base, Matrix x, Vector y, const IngestOptions& opts, nlohmann::json meta) {
  Dataset ds;
  ds.graph = opts.self_loops ? base.with_self_loops() : base;
  ds.op = propagation_operator(ds.graph, opts.op_kind);
  ds.x_fresh = x;
  ds.x = std::move(x);
  ds.y_clean = y;
  ds.y_clean_fresh = y;
  ds.y = std::move(y);
  ds.mask = MaskVector::full(ds.graph.size());
  meta["transductive"] = true;
  meta["n"] = ds.graph.size();
  meta["dim"] = ds.x.cols();
  meta["operator"] = to_string(opts.op_kind);
  meta["self_loops"] = opts.self_loops;
  meta["max_degree"] = ds.graph.max_degree();
  meta["laplacian_energy"] = laplacian_energy(base, ds.y);
  ds.meta = std::move(meta);
  return ds;
}

}  // namespace

Dataset ingest_california(const std::string& csv_path, std::size_t k, const IngestOptions& opts) {
  const auto table = read_csv_file(csv_path);
  const auto& cols = california_feature_columns();
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(table.require_column(c));
  const auto target = table.require_column(kCaliforniaTarget);
  const std::size_t n = table.rows.size();
  if (n < 2) throw FormatError("california: need at least two rows");

  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  Matrix coords(static_cast<Eigen::Index>(n), 2);
  Vector y(static_cast<Eigen::Index>(n));
  const auto lat = table.require_column("Latitude"), lon = table.require_column("Longitude");
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < idx.size(); ++c) x(i, static_cast<Eigen::Index>(c)) = table.number(r, idx[c]);
    coords(i, 0) = table.number(r, lat);
    coords(i, 1) = table.number(r, lon);
    y[i] = table.number(r, target);
  }
  for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) = standardize(x.col(c));

  auto g = knn_graph(coords, k);
  return transductive(std::move(g), std::move(x), std::move(y), opts,
                      {{"source", "california"}, {"path", csv_path}, {"knn_k", k}});
}

Dataset ingest_chameleon(const std::string& edges_path, const std::string& features_path,
                         const std::string& target_path, std::size_t top_features, const IngestOptions& opts) {
  const auto targets = read_csv_file(target_path);
  const auto id_col = targets.require_column("id");
  const auto val_col = targets.require_column("target");
  const std::size_t n = targets.rows.size();
  if (n < 2) throw FormatError("chameleon: need at least two nodes");
  Vector traffic = Vector::Constant(static_cast<Eigen::Index>(n), std::nan(""));
  for (std::size_t r = 0; r < n; ++r) {
    const double id = targets.number(r, id_col);
    if (id < 0 || id >= static_cast<double>(n) || id != std::floor(id)) {
      throw FormatError(fmt::format("chameleon targets row {}: node id {} outside [0, {})", r + 1, id, n));
    }
    traffic[static_cast<Eigen::Index>(id)] = targets.number(r, val_col);
  }
  if (!traffic.allFinite()) throw FormatError("chameleon targets: node ids are not a permutation of 0..n-1");

  const auto edge_table = read_csv_file(edges_path);
  if (edge_table.header.size() < 2) throw FormatError("chameleon edges: need two id columns");
  std::vector<Edge> edges;
  edges.reserve(edge_table.rows.size());
  for (std::size_t r = 0; r < edge_table.rows.size(); ++r) {
    const double u = edge_table.number(r, 0), v = edge_table.number(r, 1);
    if (u < 0 || v < 0 || u >= static_cast<double>(n) || v >= static_cast<double>(n)) {
      throw FormatError(fmt::format("chameleon edges row {}: dangling node id ({}, {})", r + 1, u, v));
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }

  std::ifstream fin(features_path);
  if (!fin) throw IoError(fmt::format("cannot open '{}'", features_path));
  nlohmann::json fj;
  try {
    fj = nlohmann::json::parse(fin);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", features_path, e.what()));
  }
  std::vector<std::vector<std::size_t>> nouns(n);
  std::size_t vocab = 0;
  for (const auto& [key, list] : fj.items()) {
    std::size_t node = 0;
    try {
      node = std::stoul(key);
    } catch (const std::exception&) {
      throw FormatError(fmt::format("chameleon features: non-numeric node id '{}'", key));
    }
    if (node >= n) throw FormatError(fmt::format("chameleon features: dangling node id {}", node));
    for (const auto& w : list) {
      const auto id = w.get<std::size_t>();
      nouns[node].push_back(id);
      vocab = std::max(vocab, id + 1);
    }
  }

  std::vector<std::size_t> freq(vocab, 0);
  for (const auto& l : nouns)
    for (auto w : l) ++freq[w];
  std::vector<std::size_t> order(vocab);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return freq[a] > freq[b]; });
  const std::size_t kept = top_features == 0 ? vocab : std::min(top_features, vocab);
  std::vector<std::ptrdiff_t> column(vocab, -1);
  std::vector<std::size_t> kept_ids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kept));
  std::sort(kept_ids.begin(), kept_ids.end());
  for (std::size_t c = 0; c < kept_ids.size(); ++c) column[kept_ids[c]] = static_cast<std::ptrdiff_t>(c);

  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(std::max<std::size_t>(kept, 1)));
  for (std::size_t i = 0; i < n; ++i)
    for (auto w : nouns[i])
      if (column[w] >= 0) x(static_cast<Eigen::Index>(i), column[w]) = 1.0;

  Vector y = standardize((traffic.array() + 1.0).log().matrix());
  auto g = build_graph(n, edges, false);
  return transductive(std::move(g), std::move(x), std::move(y), opts,
                      {{"source", "chameleon"}, {"vocabulary", vocab}, {"features_kept", kept}});
}

}  // namespace gnnlab
