#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gnnlab/dense.hpp"

namespace gnnlab {

/// Bernoulli(pi) observation indicators, one per node.
struct MaskVector {
  std::vector<std::uint8_t> omega;
  double pi = 1.0;

  std::size_t size() const noexcept { return omega.size(); }
  bool observed(std::size_t i) const { return omega[i] != 0; }
  std::size_t count() const;

  static MaskVector full(std::size_t n);
};

/// Independent Bernoulli(pi) draws from a generator seeded with `seed`.
MaskVector sample_mask(std::size_t n, double pi, std::uint64_t seed);

enum class LossNorm { over_n, over_omega };

std::string_view to_string(LossNorm norm);
LossNorm loss_norm_from_string(std::string_view name);

/// Squared error summed over observed nodes, divided by n or by |Omega|.
double masked_mse(const Vector& pred, const Vector& y, const MaskVector& mask,
                  LossNorm norm = LossNorm::over_n);

}  // namespace gnnlab
