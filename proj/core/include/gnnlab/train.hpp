#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gnnlab/dataset.hpp"
#include "gnnlab/mask.hpp"
#include "gnnlab/model.hpp"

namespace gnnlab {

enum class Optimizer { sgd, adam };

std::string_view to_string(Optimizer opt);
Optimizer optimizer_from_string(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 2000;
  double step_size = 1e-2;
  Optimizer optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool project = true;
  std::uint64_t seed = 0;
  LossNorm loss_norm = LossNorm::over_n;
  /// When false the GCN skip weights stay at their initial values.
  bool train_gamma = true;

  void validate() const;
};

template <class Params>
struct FitResult {
  Params params;
  std::vector<double> loss_trace;  // objective after each step
  std::size_t final_sparsity = 0;
  double wall_time = 0.0;  // seconds
};

template <class Params>
struct LossGrad {
  double loss = 0.0;
  Params grad;
};

/// Reverse-mode gradient of masked_mse(gnn_predict(p), y). ReLU has slope 0 at
/// 0; the output clamp passes gradient only strictly inside (-F, F).
LossGrad<GnnParams> gradients(const GnnParams& p, const PropagationOperator& op, const Matrix& x,
                              const Vector& y, const MaskVector& mask, LossNorm norm = LossNorm::over_n);

/// Feature-only readout (no propagation); the MLP baseline.
LossGrad<MlpParams> gradients(const MlpParams& p, const Matrix& x, const Vector& y, const MaskVector& mask,
                              LossNorm norm = LossNorm::over_n);

LossGrad<MultiscaleParams> gradients(const MultiscaleParams& p, const PropagationOperator& op, const Matrix& x,
                                     const Vector& y, const MaskVector& mask, LossNorm norm = LossNorm::over_n);

/// Full-batch first-order minimization of the masked least-squares objective
/// on (data.op, data.x, data.y, data.mask). Throws NumericError naming the
/// epoch if the objective turns non-finite.
FitResult<GnnParams> train_lse(const GnnParams& init, const Dataset& data, const TrainConfig& cfg);
FitResult<MlpParams> train_lse(const MlpParams& init, const Dataset& data, const TrainConfig& cfg);
FitResult<MultiscaleParams> train_lse(const MultiscaleParams& init, const Dataset& data, const TrainConfig& cfg);

/// (1/n) sum_i (pred_i - y_i)^2 over all nodes.
double mean_squared_error(const Vector& pred, const Vector& y);

/// Inductive risk: mean squared error of the fitted model on fresh features
/// against noiseless targets.
double evaluate_risk(const GnnParams& p, const PropagationOperator& op, const Matrix& x_fresh, const Vector& y_clean);
double evaluate_risk(const MlpParams& p, const Matrix& x_fresh, const Vector& y_clean);
double evaluate_risk(const MultiscaleParams& p, const PropagationOperator& op, const Matrix& x_fresh,
                     const Vector& y_clean);

}  // namespace gnnlab
