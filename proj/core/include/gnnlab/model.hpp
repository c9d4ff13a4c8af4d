#pragma once

#include <cstddef>
#include <vector>

#include "gnnlab/dense.hpp"
#include "gnnlab/propagation.hpp"

namespace gnnlab {

/// Linear GCN with skip reweighting: sum_l gamma_l op^l X W_1 ... W_l.
struct GcnParams {
  std::vector<Matrix> W;  // L1 matrices, each d x d
  std::vector<double> gamma;

  std::size_t depth() const noexcept { return W.size(); }
  std::size_t dim() const { return W.empty() ? 0 : static_cast<std::size_t>(W.front().rows()); }
  void validate() const;
};

/// ReLU network with widths p_0..p_{L2+1} (p_{L2+1} = 1) whose output is
/// clamped to [-f_trunc, f_trunc]. M[l] is p_{l+1} x p_l.
struct MlpParams {
  std::vector<std::size_t> widths;
  std::vector<Matrix> M;
  std::vector<Vector> b;
  double f_trunc = 1.0;

  std::size_t hidden_layers() const noexcept { return M.empty() ? 0 : M.size() - 1; }
  std::size_t input_width() const { return widths.front(); }
  void validate() const;
};

struct GnnParams {
  GcnParams gcn;
  MlpParams mlp;

  void validate() const;
};

/// Multi-hop fusion model: Z = sum_l softmax(alpha)_l op^l X W, then a
/// node-wise head.
struct MultiscaleParams {
  Vector alpha;
  Matrix W;
  MlpParams head;

  std::size_t hops() const noexcept { return static_cast<std::size_t>(alpha.size()); }
  void validate() const;
};

Vector softmax(const Vector& logits);

Matrix gcn_forward(const GcnParams& p, const PropagationOperator& op, const Matrix& x);

double mlp_forward(const MlpParams& p, const Eigen::Ref<const Vector>& z);
/// Applies the shared readout to every row of `z`.
Vector mlp_forward_rows(const MlpParams& p, const Matrix& z);

Vector gnn_predict(const GnnParams& p, const PropagationOperator& op, const Matrix& x);

Vector multiscale_forward(const MultiscaleParams& p, const PropagationOperator& op, const Matrix& x);

/// GCN realizing the polynomial filter exactly: W_l = I and gamma_l = theta_l
/// for l <= k, zero layers beyond. Requires depth >= k and beta <= 1.
GcnParams embed_polynomial_as_gcn(const FilterCoefficients& coeffs, std::size_t depth, std::size_t dim);

/// Entrywise clamp of every parameter to [-1, 1]. Softmax logits of the
/// multiscale model are left alone; they are unconstrained by construction.
GnnParams project_params(GnnParams p);
MlpParams project_params(MlpParams p);
MultiscaleParams project_params(MultiscaleParams p);

/// Count of MLP weights and biases with magnitude strictly above eps.
std::size_t effective_sparsity(const MlpParams& p, double eps = 1e-8);

struct MlpShape {
  std::vector<std::size_t> hidden;  // p_1..p_{L2}
  double f_trunc = 1.0;
};

struct GnnShape {
  std::size_t dim = 1;
  std::size_t depth = 2;  // L1
  MlpShape readout;
};

/// Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases, gamma_l = 1/L1.
GnnParams init_gnn(const GnnShape& shape, Rng& rng);
MlpParams init_mlp(std::size_t input_width, const MlpShape& shape, Rng& rng);
MultiscaleParams init_multiscale(std::size_t dim, std::size_t hops, const MlpShape& head, Rng& rng);

}  // namespace gnnlab
