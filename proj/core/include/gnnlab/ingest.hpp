#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gnnlab/dataset.hpp"
#include "gnnlab/propagation.hpp"

namespace gnnlab {

/// Feature columns expected in a California-housing style CSV, in order.
const std::vector<std::string>& california_feature_columns();
inline constexpr const char* kCaliforniaTarget = "MedHouseVal";

struct IngestOptions {
  OperatorKind op_kind = OperatorKind::sym_norm;
  bool self_loops = true;
};

/// Standardized features, k-NN graph over (Latitude, Longitude), target =
/// median house value. Transductive: x_fresh = x and the mask is full.
Dataset ingest_california(const std::string& csv_path, std::size_t k, const IngestOptions& opts = {});

/// Wikipedia page-network corpus: edge CSV (id1,id2), JSON object mapping node
/// id to its list of noun ids, target CSV (id,target). Features are 0/1
/// indicators; the target is log(1 + traffic), standardized. `top_features`
/// keeps only the most frequent nouns (0 keeps all).
Dataset ingest_chameleon(const std::string& edges_path, const std::string& features_path,
                         const std::string& target_path, std::size_t top_features = 0,
                         const IngestOptions& opts = {});

}  // namespace gnnlab
