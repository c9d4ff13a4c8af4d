#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gnnlab/dataset.hpp"
#include "gnnlab/dense.hpp"
#include "gnnlab/graph.hpp"
#include "gnnlab/model.hpp"
#include "gnnlab/propagation.hpp"

namespace gnnlab {

enum class TopologyKind { ring, erdos_renyi, sbm2, rgg, barabasi_albert };

std::string_view to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(std::string_view name);

struct TopologySpec {
  TopologyKind kind = TopologyKind::ring;
  std::size_t n = 100;
  double avg_degree = 2.0;
  std::uint64_t seed = 0;
  // Test-only overrides of the two-block edge probabilities.
  std::optional<double> sbm_p_within;
  std::optional<double> sbm_p_between;
};

/// Seeded topology without self-loops.
///   ring            cycle on n >= 3 nodes
///   erdos_renyi     each pair with probability avg_degree / n
///   sbm2            two equal blocks, 0.55 avg_degree / n within, 0.055 avg_degree / n across
///   rgg             uniform points on the unit square, radius sqrt(avg_degree / (pi n))
///   barabasi_albert preferential attachment with floor(avg_degree / 2) edges per new node
SparseGraph gen_topology(const TopologySpec& spec);

struct FeatureDistribution {
  enum class Kind { uniform01, gaussian } kind = Kind::uniform01;
  double sigma = 1.0;
};

FeatureMatrix sample_features(std::size_t n, std::size_t d, const FeatureDistribution& dist, std::uint64_t seed);

/// Brownian path on 2^12 equal subintervals of [0, 1], read through a sigmoid:
/// phi(z) = BM(sigmoid(z / scale)) with linear interpolation between grid points.
class HolderTarget {
 public:
  static constexpr std::size_t kIntervals = std::size_t{1} << 12;

  HolderTarget(std::vector<double> grid_values, double scale);

  const std::vector<double>& grid_values() const noexcept { return grid_; }
  double scale() const noexcept { return scale_; }
  /// Path value at t in [0, 1].
  double path(double t) const;
  double operator()(double z) const;

 private:
  std::vector<double> grid_;
  double scale_;
};

HolderTarget brownian_target(std::uint64_t seed, double scale = 1.0);

/// Frozen residual ReLU network: h = A z, then depth blocks h += relu(B h + c),
/// output w.h + e. Gaussian weights scaled by 1/sqrt(fan_in).
class RandomDnnTarget {
 public:
  RandomDnnTarget(std::size_t dim, std::size_t depth, std::size_t width, std::uint64_t seed, bool zero_biases = false);

  double operator()(const Eigen::Ref<const Vector>& z) const;
  Vector evaluate_rows(const Matrix& z) const;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(input_.cols()); }

 private:
  Matrix input_;
  std::vector<Matrix> blocks_;
  std::vector<Vector> biases_;
  Vector out_;
  double out_bias_ = 0.0;
};

RandomDnnTarget random_dnn_target(std::size_t dim, std::size_t depth, std::size_t width, std::uint64_t seed);

/// (v - mean) / sample-std; returns the pair (mean, std) through the out params.
Vector standardize(const Vector& v, double* mean_out = nullptr, double* std_out = nullptr);

enum class TargetKind { brownian, random_dnn, identity };

std::string_view to_string(TargetKind kind);
TargetKind target_kind_from_string(std::string_view name);

struct SyntheticSpec {
  TopologySpec topology;
  std::size_t dim = 1;
  std::size_t filter_order = 2;  // k
  TargetKind target = TargetKind::brownian;
  OperatorKind op_kind = OperatorKind::neigh_avg;
  double pi = 0.95;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  // Defaults follow the kind of target: uniform features for brownian,
  // Gaussian features with standardized Z for random_dnn.
  std::optional<FeatureDistribution> features;
  std::optional<bool> standardize_z;
  /// Self-loops are added before building the operator (A + I).
  bool self_loops = true;
  double brownian_scale = 1.0;
  std::size_t dnn_depth = 2;
  std::size_t dnn_width = 16;
  /// Explicit theta replaces the random draw (tests).
  std::optional<std::vector<double>> theta;
  /// Seed for the target function alone; derived from `seed` when unset, so
  /// callers can hold phi fixed while everything else varies.
  std::optional<std::uint64_t> target_seed;
};

/// Draws theta ~ U[0,1]^k and rescales to unit l1 norm.
std::vector<double> draw_filter(std::size_t k, std::uint64_t seed);

/// Full generative model: graph, operator, features (and an independent copy),
/// propagated features Z = sum theta_j S^j X, targets phi(Z), Gaussian noise on
/// the training copy only, and a Bernoulli mask. Every random component is
/// seeded from spec.seed; spec.topology.seed is ignored.
///
/// brownian and identity targets read the row mean of Z.
Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace gnnlab
