#include "gnnlab/mask.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

std::size_t MaskVector::count() const {
  return static_cast<std::size_t>(std::count_if(omega.begin(), omega.end(), [](auto w) { return w != 0; }));
}

MaskVector MaskVector::full(std::size_t n) { return {std::vector<std::uint8_t>(n, 1), 1.0}; }

MaskVector sample_mask(std::size_t n, double pi, std::uint64_t seed) {
  if (!(pi > 0.0 && pi <= 1.0)) throw InputError(fmt::format("sample_mask: pi = {} outside (0, 1]", pi));
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MaskVector m{std::vector<std::uint8_t>(n), pi};
  for (auto& w : m.omega) w = u(rng) < pi ? 1 : 0;
  return m;
}

std::string_view to_string(LossNorm norm) { return norm == LossNorm::over_n ? "over_n" : "over_omega"; }

LossNorm loss_norm_from_string(std::string_view name) {
  if (name == "over_n") return LossNorm::over_n;
  if (name == "over_omega") return LossNorm::over_omega;
  throw InputError(fmt::format("unknown loss normalization '{}'", name));
}

double masked_mse(const Vector& pred, const Vector& y, const MaskVector& mask, LossNorm norm) {
  if (pred.size() != y.size() || static_cast<std::size_t>(y.size()) != mask.size()) {
    throw InputError(fmt::format("masked_mse: lengths {}, {}, {} differ", pred.size(), y.size(), mask.size()));
  }
  double sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.observed(i)) continue;
    const double r = y[static_cast<Eigen::Index>(i)] - pred[static_cast<Eigen::Index>(i)];
    sum += r * r;
    ++observed;
  }
  if (observed == 0) throw InputError("masked_mse: no observed nodes");
  const double denom = norm == LossNorm::over_n ? static_cast<double>(mask.size()) : static_cast<double>(observed);
  return sum / denom;
}

}  // namespace gnnlab
