#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace gnnlab {

/// Dense row-major matrix; node-indexed data always has one node per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// n x d node features. Raw inputs live in [0,1] or are Gaussian; propagated
/// features are unconstrained.
using FeatureMatrix = Matrix;

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent sub-streams from a seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix_seed(base ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace gnnlab
