#pragma once

#include <nlohmann/json.hpp>

#include "gnnlab/dense.hpp"
#include "gnnlab/graph.hpp"
#include "gnnlab/mask.hpp"
#include "gnnlab/propagation.hpp"

namespace gnnlab {

/// Everything one fit and its evaluation need. For synthetic data x_fresh is
/// an independent copy of x and y_clean_fresh holds noiseless targets on it;
/// for fixed corpora x_fresh == x and meta["transductive"] is true.
struct Dataset {
  SparseGraph graph;
  PropagationOperator op;
  FeatureMatrix x;
  FeatureMatrix x_fresh;
  Vector y;
  Vector y_clean;
  Vector y_clean_fresh;
  MaskVector mask;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const noexcept { return graph.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
  bool transductive() const { return meta.value("transductive", false); }
  /// Throws InputError if any length or dimension disagrees.
  void validate() const;
};

}  // namespace gnnlab
