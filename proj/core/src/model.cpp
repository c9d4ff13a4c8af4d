#include "gnnlab/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

void GcnParams::validate() const {
  if (W.size() != gamma.size()) {
    throw InputError(fmt::format("gcn: {} weight matrices but {} skip weights", W.size(), gamma.size()));
  }
  const auto d = dim();
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (static_cast<std::size_t>(W[l].rows()) != d || static_cast<std::size_t>(W[l].cols()) != d) {
      throw InputError(fmt::format("gcn: layer {} weight is {}x{}, expected {}x{}", l + 1, W[l].rows(),
                                   W[l].cols(), d, d));
    }
  }
}

void MlpParams::validate() const {
  if (widths.size() < 2) throw InputError("mlp: need at least input and output widths");
  if (widths.back() != 1) throw InputError("mlp: output width must be 1");
  if (M.size() != widths.size() - 1 || b.size() != M.size()) throw InputError("mlp: layer count mismatch");
  for (std::size_t l = 0; l < M.size(); ++l) {
    if (static_cast<std::size_t>(M[l].rows()) != widths[l + 1] ||
        static_cast<std::size_t>(M[l].cols()) != widths[l] ||
        static_cast<std::size_t>(b[l].size()) != widths[l + 1]) {
      throw InputError(fmt::format("mlp: layer {} shape inconsistent with widths", l));
    }
  }
  if (!(f_trunc >= 1.0)) throw InputError("mlp: truncation level must be at least 1");
}

void GnnParams::validate() const {
  gcn.validate();
  mlp.validate();
  if (gcn.depth() > 0 && mlp.input_width() != gcn.dim()) {
    throw InputError(fmt::format("gnn: readout expects width {} but GCN emits {}", mlp.input_width(), gcn.dim()));
  }
}

void MultiscaleParams::validate() const {
  if (alpha.size() == 0) throw InputError("multiscale: need at least one hop");
  if (W.rows() != W.cols()) throw InputError("multiscale: W must be square");
  head.validate();
  if (head.input_width() != static_cast<std::size_t>(W.cols())) {
    throw InputError("multiscale: head width does not match W");
  }
}

Vector softmax(const Vector& logits) {
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

Matrix gcn_forward(const GcnParams& p, const PropagationOperator& op, const Matrix& x) {
  p.validate();
  if (static_cast<std::size_t>(x.rows()) != op.size()) {
    throw InputError(fmt::format("gcn_forward: operator size {} but {} feature rows", op.size(), x.rows()));
  }
  if (p.depth() > 0 && static_cast<std::size_t>(x.cols()) != p.dim()) {
    throw InputError(fmt::format("gcn_forward: features have {} columns, weights expect {}", x.cols(), p.dim()));
  }
  Matrix h = x;
  Matrix z = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t l = 0; l < p.depth(); ++l) {
    h = op.apply(h) * p.W[l];
    z.noalias() += p.gamma[l] * h;
  }
  return z;
}

namespace {

Matrix mlp_batch(const MlpParams& p, const Matrix& z) {
  Matrix h = z;
  for (std::size_t l = 0; l < p.M.size(); ++l) {
    Matrix next = h * p.M[l].transpose();
    next.rowwise() += p.b[l].transpose();
    if (l + 1 < p.M.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h.cwiseMax(-p.f_trunc).cwiseMin(p.f_trunc);
}

}  // namespace

double mlp_forward(const MlpParams& p, const Eigen::Ref<const Vector>& z) {
  p.validate();
  if (static_cast<std::size_t>(z.size()) != p.input_width()) {
    throw InputError(fmt::format("mlp_forward: input width {} but readout expects {}", z.size(), p.input_width()));
  }
  Vector h = z;
  for (std::size_t l = 0; l < p.M.size(); ++l) {
    Vector next = p.M[l] * h + p.b[l];
    if (l + 1 < p.M.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return std::clamp(h[0], -p.f_trunc, p.f_trunc);
}

Vector mlp_forward_rows(const MlpParams& p, const Matrix& z) {
  p.validate();
  if (static_cast<std::size_t>(z.cols()) != p.input_width()) {
    throw InputError(fmt::format("mlp_forward: input width {} but readout expects {}", z.cols(), p.input_width()));
  }
  return mlp_batch(p, z).col(0);
}

Vector gnn_predict(const GnnParams& p, const PropagationOperator& op, const Matrix& x) {
  p.validate();
  return mlp_forward_rows(p.mlp, gcn_forward(p.gcn, op, x));
}

Vector multiscale_forward(const MultiscaleParams& p, const PropagationOperator& op, const Matrix& x) {
  p.validate();
  if (static_cast<std::size_t>(x.rows()) != op.size() || x.cols() != p.W.rows()) {
    throw InputError("multiscale_forward: shape mismatch");
  }
  const Vector w = softmax(p.alpha);
  Matrix h = x * p.W;
  Matrix z = Matrix::Zero(x.rows(), p.W.cols());
  for (Eigen::Index l = 0; l < w.size(); ++l) {
    h = op.apply(h);
    z.noalias() += w[l] * h;
  }
  return mlp_forward_rows(p.head, z);
}

GcnParams embed_polynomial_as_gcn(const FilterCoefficients& coeffs, std::size_t depth, std::size_t dim) {
  coeffs.validate();
  if (depth < coeffs.order()) {
    throw InputError(fmt::format("embed: depth {} is smaller than filter order {}", depth, coeffs.order()));
  }
  if (coeffs.beta > 1.0) {
    throw InputError(fmt::format(
        "embed: beta = {} exceeds 1; divide theta by beta and fold the scale into the readout", coeffs.beta));
  }
  if (dim == 0) throw InputError("embed: feature dimension must be positive");
  GcnParams p;
  const auto d = static_cast<Eigen::Index>(dim);
  for (std::size_t l = 0; l < depth; ++l) {
    const bool active = l < coeffs.order();
    p.W.push_back(active ? Matrix(Matrix::Identity(d, d)) : Matrix(Matrix::Zero(d, d)));
    p.gamma.push_back(active ? coeffs.theta[l] : 0.0);
  }
  return p;
}

namespace {

void clamp_unit(Matrix& m) { m = m.cwiseMax(-1.0).cwiseMin(1.0); }
void clamp_unit(Vector& v) { v = v.cwiseMax(-1.0).cwiseMin(1.0); }

}  // namespace

MlpParams project_params(MlpParams p) {
  for (auto& m : p.M) clamp_unit(m);
  for (auto& b : p.b) clamp_unit(b);
  return p;
}

GnnParams project_params(GnnParams p) {
  for (auto& w : p.gcn.W) clamp_unit(w);
  for (auto& g : p.gcn.gamma) g = std::clamp(g, -1.0, 1.0);
  p.mlp = project_params(std::move(p.mlp));
  return p;
}

MultiscaleParams project_params(MultiscaleParams p) {
  clamp_unit(p.W);
  p.head = project_params(std::move(p.head));
  return p;
}

std::size_t effective_sparsity(const MlpParams& p, double eps) {
  std::size_t count = 0;
  for (const auto& m : p.M) count += static_cast<std::size_t>((m.array().abs() > eps).count());
  for (const auto& b : p.b) count += static_cast<std::size_t>((b.array().abs() > eps).count());
  return count;
}

namespace {

Matrix uniform_fan_in(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

MlpParams init_mlp(std::size_t input_width, const MlpShape& shape, Rng& rng) {
  MlpParams p;
  p.f_trunc = shape.f_trunc;
  p.widths.push_back(input_width);
  p.widths.insert(p.widths.end(), shape.hidden.begin(), shape.hidden.end());
  p.widths.push_back(1);
  for (std::size_t l = 0; l + 1 < p.widths.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(p.widths[l + 1]);
    p.M.push_back(uniform_fan_in(rows, static_cast<Eigen::Index>(p.widths[l]), rng));
    p.b.push_back(Vector::Zero(rows));
  }
  p.validate();
  return p;
}

GnnParams init_gnn(const GnnShape& shape, Rng& rng) {
  if (shape.depth == 0) throw InputError("init_gnn: GCN depth must be at least 1");
  GnnParams p;
  const auto d = static_cast<Eigen::Index>(shape.dim);
  for (std::size_t l = 0; l < shape.depth; ++l) {
    p.gcn.W.push_back(uniform_fan_in(d, d, rng));
    p.gcn.gamma.push_back(1.0 / static_cast<double>(shape.depth));
  }
  p.mlp = init_mlp(shape.dim, shape.readout, rng);
  return p;
}

MultiscaleParams init_multiscale(std::size_t dim, std::size_t hops, const MlpShape& head, Rng& rng) {
  if (hops == 0) throw InputError("init_multiscale: need at least one hop");
  MultiscaleParams p;
  p.alpha = Vector::Zero(static_cast<Eigen::Index>(hops));
  const auto d = static_cast<Eigen::Index>(dim);
  p.W = uniform_fan_in(d, d, rng);
  p.head = init_mlp(dim, head, rng);
  return p;
}

}  // namespace gnnlab
