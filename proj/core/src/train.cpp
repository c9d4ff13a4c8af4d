#include "gnnlab/train.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

std::string_view to_string(Optimizer opt) { return opt == Optimizer::sgd ? "sgd" : "adam"; }

Optimizer optimizer_from_string(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw InputError(fmt::format("unknown optimizer '{}'", name));
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError("train config: epochs must be at least 1");
  if (!(step_size > 0.0)) throw InputError("train config: step size must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw InputError("train config: invalid Adam moments");
  }
}

void Dataset::validate() const {
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (op.size() != graph.size() || x.rows() != n || x_fresh.rows() != n || y.size() != n || y_clean.size() != n ||
      y_clean_fresh.size() != n || mask.size() != graph.size()) {
    throw InputError("dataset: component lengths disagree with node count");
  }
  if (x.cols() != x_fresh.cols() || x.cols() == 0) throw InputError("dataset: feature dimensions disagree");
}

namespace {

/// Loss derivative with respect to each prediction.
Vector loss_seed(const Vector& pred, const Vector& y, const MaskVector& mask, LossNorm norm, double& loss) {
  loss = masked_mse(pred, y, mask, norm);
  const double denom =
      norm == LossNorm::over_n ? static_cast<double>(mask.size()) : static_cast<double>(mask.count());
  Vector seed = Vector::Zero(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (mask.observed(static_cast<std::size_t>(i))) seed[i] = 2.0 * (pred[i] - y[i]) / denom;
  }
  return seed;
}

struct MlpTape {
  std::vector<Matrix> inputs;  // activations entering each affine layer
  std::vector<Matrix> pre;     // pre-activations of each layer
  Vector out;                  // clamped output
};

MlpTape mlp_tape(const MlpParams& p, const Matrix& z) {
  MlpTape t;
  Matrix h = z;
  for (std::size_t l = 0; l < p.M.size(); ++l) {
    t.inputs.push_back(h);
    Matrix s = h * p.M[l].transpose();
    s.rowwise() += p.b[l].transpose();
    t.pre.push_back(s);
    h = l + 1 < p.M.size() ? s.cwiseMax(0.0) : s;
  }
  t.out = h.col(0).cwiseMax(-p.f_trunc).cwiseMin(p.f_trunc);
  return t;
}

/// Backpropagates d(loss)/d(output) through the readout; returns d(loss)/dZ.
Matrix mlp_backward(const MlpParams& p, const MlpTape& t, const Vector& seed, MlpParams& grad) {
  grad.widths = p.widths;
  grad.f_trunc = p.f_trunc;
  grad.M.resize(p.M.size());
  grad.b.resize(p.b.size());

  const auto n = seed.size();
  Matrix ds(n, 1);
  const auto& s_out = t.pre.back();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = s_out(i, 0);
    ds(i, 0) = (s > -p.f_trunc && s < p.f_trunc) ? seed[i] : 0.0;
  }
  for (std::size_t l = p.M.size(); l-- > 0;) {
    grad.M[l] = ds.transpose() * t.inputs[l];
    grad.b[l] = ds.colwise().sum().transpose();
    Matrix da = ds * p.M[l];
    if (l > 0) {
      da = (t.pre[l - 1].array() > 0.0).select(da, 0.0);
    }
    ds = std::move(da);
  }
  return ds;
}

struct GcnTape {
  std::vector<Matrix> propagated;  // op * H^{l-1}
  std::vector<Matrix> hidden;      // H^l
  Matrix z;
};

GcnTape gcn_tape(const GcnParams& p, const PropagationOperator& op, const Matrix& x) {
  GcnTape t;
  Matrix h = x;
  t.z = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t l = 0; l < p.depth(); ++l) {
    t.propagated.push_back(op.apply(h));
    h = t.propagated.back() * p.W[l];
    t.z.noalias() += p.gamma[l] * h;
    t.hidden.push_back(h);
  }
  return t;
}

void gcn_backward(const GcnParams& p, const PropagationOperator& op, const GcnTape& t, const Matrix& dz,
                  GcnParams& grad) {
  const std::size_t L = p.depth();
  grad.W.resize(L);
  grad.gamma.assign(L, 0.0);
  Matrix g = Matrix::Zero(dz.rows(), dz.cols());
  for (std::size_t l = L; l-- > 0;) {
    g.noalias() += p.gamma[l] * dz;
    grad.gamma[l] = (dz.array() * t.hidden[l].array()).sum();
    grad.W[l] = t.propagated[l].transpose() * g;
    if (l > 0) g = op.apply_transpose(g * p.W[l].transpose());
  }
}

void check_shapes(const PropagationOperator& op, const Matrix& x, const Vector& y, const MaskVector& mask) {
  if (static_cast<std::size_t>(x.rows()) != op.size() || static_cast<std::size_t>(y.size()) != op.size() ||
      mask.size() != op.size()) {
    throw InputError("gradients: operator, features, responses and mask must agree in length");
  }
}

}  // namespace

LossGrad<GnnParams> gradients(const GnnParams& p, const PropagationOperator& op, const Matrix& x, const Vector& y,
                              const MaskVector& mask, LossNorm norm) {
  p.validate();
  check_shapes(op, x, y, mask);
  if (static_cast<std::size_t>(x.cols()) != p.gcn.dim()) throw InputError("gradients: feature width mismatch");
  const GcnTape gt = gcn_tape(p.gcn, op, x);
  const MlpTape mt = mlp_tape(p.mlp, gt.z);
  LossGrad<GnnParams> out;
  const Vector seed = loss_seed(mt.out, y, mask, norm, out.loss);
  const Matrix dz = mlp_backward(p.mlp, mt, seed, out.grad.mlp);
  gcn_backward(p.gcn, op, gt, dz, out.grad.gcn);
  return out;
}

LossGrad<MlpParams> gradients(const MlpParams& p, const Matrix& x, const Vector& y, const MaskVector& mask,
                              LossNorm norm) {
  p.validate();
  if (y.size() != x.rows() || mask.size() != static_cast<std::size_t>(x.rows())) {
    throw InputError("gradients: features, responses and mask must agree in length");
  }
  const MlpTape mt = mlp_tape(p, x);
  LossGrad<MlpParams> out;
  const Vector seed = loss_seed(mt.out, y, mask, norm, out.loss);
  mlp_backward(p, mt, seed, out.grad);
  return out;
}

LossGrad<MultiscaleParams> gradients(const MultiscaleParams& p, const PropagationOperator& op, const Matrix& x,
                                     const Vector& y, const MaskVector& mask, LossNorm norm) {
  p.validate();
  check_shapes(op, x, y, mask);
  const Vector w = softmax(p.alpha);
  const auto L = w.size();
  std::vector<Matrix> hops;
  Matrix h = x * p.W;
  Matrix z = Matrix::Zero(x.rows(), p.W.cols());
  for (Eigen::Index l = 0; l < L; ++l) {
    h = op.apply(h);
    z.noalias() += w[l] * h;
    hops.push_back(h);
  }
  const MlpTape mt = mlp_tape(p.head, z);
  LossGrad<MultiscaleParams> out;
  const Vector seed = loss_seed(mt.out, y, mask, norm, out.loss);
  const Matrix dz = mlp_backward(p.head, mt, seed, out.grad.head);

  Vector dw(L);
  for (Eigen::Index l = 0; l < L; ++l) dw[l] = (dz.array() * hops[static_cast<std::size_t>(l)].array()).sum();
  out.grad.alpha = w.cwiseProduct((dw.array() - w.dot(dw)).matrix());

  // d/d(XW) of sum_l w_l op^l (XW), accumulated Horner-style through op^T
  Matrix g = w[L - 1] * dz;
  for (Eigen::Index l = L - 1; l >= 0; --l) {
    g = op.apply_transpose(g);
    if (l > 0) g.noalias() += w[l - 1] * dz;
  }
  out.grad.W = x.transpose() * g;
  return out;
}

namespace {

template <class F>
void visit_blocks(MlpParams& p, F&& f) {
  for (auto& m : p.M) f(m.data(), static_cast<std::size_t>(m.size()));
  for (auto& b : p.b) f(b.data(), static_cast<std::size_t>(b.size()));
}

template <class F>
void visit_blocks(GnnParams& p, F&& f) {
  for (auto& w : p.gcn.W) f(w.data(), static_cast<std::size_t>(w.size()));
  f(p.gcn.gamma.data(), p.gcn.gamma.size());
  visit_blocks(p.mlp, f);
}

template <class F>
void visit_blocks(MultiscaleParams& p, F&& f) {
  f(p.alpha.data(), static_cast<std::size_t>(p.alpha.size()));
  f(p.W.data(), static_cast<std::size_t>(p.W.size()));
  visit_blocks(p.head, f);
}

template <class P>
std::vector<double> flatten(P& p) {
  std::vector<double> out;
  visit_blocks(p, [&](double* d, std::size_t len) { out.insert(out.end(), d, d + len); });
  return out;
}

template <class P>
void unflatten(P& p, const std::vector<double>& flat) {
  std::size_t off = 0;
  visit_blocks(p, [&](double* d, std::size_t len) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off), flat.begin() + static_cast<std::ptrdiff_t>(off + len), d);
    off += len;
  });
}

std::size_t sparsity_of(const GnnParams& p) { return effective_sparsity(p.mlp); }
std::size_t sparsity_of(const MlpParams& p) { return effective_sparsity(p); }
std::size_t sparsity_of(const MultiscaleParams& p) { return effective_sparsity(p.head); }

template <class P, class LossGradFn, class AdjustGrad>
FitResult<P> minimize(P params, const TrainConfig& cfg, LossGradFn&& loss_grad, AdjustGrad&& adjust) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  if (cfg.project) params = project_params(std::move(params));

  std::vector<double> theta = flatten(params);
  std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
  FitResult<P> result;
  result.loss_trace.reserve(cfg.epochs);
  double b1_pow = 1.0, b2_pow = 1.0;

  for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
    auto lg = loss_grad(params);
    if (!std::isfinite(lg.loss)) {
      throw NumericError(fmt::format("training objective became non-finite at epoch {}", epoch));
    }
    if (epoch > 0) result.loss_trace.push_back(lg.loss);
    if (epoch == cfg.epochs) break;

    adjust(lg.grad);
    const std::vector<double> g = flatten(lg.grad);
    if (cfg.optimizer == Optimizer::sgd) {
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg.step_size * g[k];
    } else {
      b1_pow *= cfg.adam_beta1;
      b2_pow *= cfg.adam_beta2;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        m1[k] = cfg.adam_beta1 * m1[k] + (1.0 - cfg.adam_beta1) * g[k];
        m2[k] = cfg.adam_beta2 * m2[k] + (1.0 - cfg.adam_beta2) * g[k] * g[k];
        const double mhat = m1[k] / (1.0 - b1_pow);
        const double vhat = m2[k] / (1.0 - b2_pow);
        theta[k] -= cfg.step_size * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      }
    }
    unflatten(params, theta);
    if (cfg.project) {
      params = project_params(std::move(params));
      theta = flatten(params);
    }
  }
  result.final_sparsity = sparsity_of(params);
  result.params = std::move(params);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

FitResult<GnnParams> train_lse(const GnnParams& init, const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  return minimize(
      init, cfg,
      [&](const GnnParams& p) { return gradients(p, data.op, data.x, data.y, data.mask, cfg.loss_norm); },
      [&](GnnParams& g) {
        if (!cfg.train_gamma) std::fill(g.gcn.gamma.begin(), g.gcn.gamma.end(), 0.0);
      });
}

FitResult<MlpParams> train_lse(const MlpParams& init, const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  return minimize(
      init, cfg, [&](const MlpParams& p) { return gradients(p, data.x, data.y, data.mask, cfg.loss_norm); },
      [](MlpParams&) {});
}

FitResult<MultiscaleParams> train_lse(const MultiscaleParams& init, const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  return minimize(
      init, cfg,
      [&](const MultiscaleParams& p) { return gradients(p, data.op, data.x, data.y, data.mask, cfg.loss_norm); },
      [](MultiscaleParams&) {});
}

double mean_squared_error(const Vector& pred, const Vector& y) {
  if (pred.size() != y.size()) {
    throw InputError(fmt::format("mean_squared_error: lengths {} and {} differ", pred.size(), y.size()));
  }
  if (y.size() == 0) throw InputError("mean_squared_error: empty input");
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

double evaluate_risk(const GnnParams& p, const PropagationOperator& op, const Matrix& x_fresh, const Vector& y_clean) {
  if (static_cast<std::size_t>(y_clean.size()) != op.size()) throw InputError("evaluate_risk: length mismatch");
  return mean_squared_error(gnn_predict(p, op, x_fresh), y_clean);
}

double evaluate_risk(const MlpParams& p, const Matrix& x_fresh, const Vector& y_clean) {
  if (y_clean.size() != x_fresh.rows()) throw InputError("evaluate_risk: length mismatch");
  return mean_squared_error(mlp_forward_rows(p, x_fresh), y_clean);
}

double evaluate_risk(const MultiscaleParams& p, const PropagationOperator& op, const Matrix& x_fresh,
                     const Vector& y_clean) {
  if (static_cast<std::size_t>(y_clean.size()) != op.size()) throw InputError("evaluate_risk: length mismatch");
  return mean_squared_error(multiscale_forward(p, op, x_fresh), y_clean);
}

}  // namespace gnnlab
