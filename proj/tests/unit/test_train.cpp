#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gnnlab/datagen.hpp"
#include "gnnlab/errors.hpp"
#include "gnnlab/mask.hpp"
#include "gnnlab/train.hpp"
#include "oracles.hpp"

using namespace gnnlab;
using namespace gnnlab::testing;

namespace {

template <class F>
void each_param(GnnParams& p, F&& f) {
  for (auto& w : p.gcn.W)
    for (Eigen::Index i = 0; i < w.size(); ++i) f(w.data()[i]);
  for (auto& g : p.gcn.gamma) f(g);
  for (auto& m : p.mlp.M)
    for (Eigen::Index i = 0; i < m.size(); ++i) f(m.data()[i]);
  for (auto& b : p.mlp.b)
    for (Eigen::Index i = 0; i < b.size(); ++i) f(b[i]);
}

std::vector<double> flat(GnnParams p) {
  std::vector<double> v;
  each_param(p, [&](double& x) { v.push_back(x); });
  return v;
}

GnnParams with_flat(GnnParams p, const std::vector<double>& v) {
  std::size_t k = 0;
  each_param(p, [&](double& x) { x = v[k++]; });
  return p;
}

Dataset make_dataset(const SparseGraph& g, OperatorKind kind, const Matrix& x, const Vector& y, MaskVector mask) {
  Dataset d;
  d.graph = g;
  d.op = propagation_operator(g, kind);
  d.x = x;
  d.x_fresh = x;
  d.y = y;
  d.y_clean = y;
  d.y_clean_fresh = y;
  d.mask = std::move(mask);
  return d;
}

// Smallest distance of any ReLU pre-activation to 0 or of the raw output to
// +-F, over all nodes. Finite differences straddling a kink are meaningless.
double kink_distance(const GnnParams& p, const PropagationOperator& op, const Matrix& x) {
  const Matrix z = gcn_forward(p.gcn, op, x);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Vector h = z.row(i).transpose();
    for (std::size_t l = 0; l < p.mlp.M.size(); ++l) {
      h = p.mlp.M[l] * h + p.mlp.b[l];
      if (l + 1 < p.mlp.M.size()) {
        best = std::min(best, h.cwiseAbs().minCoeff());
        h = h.cwiseMax(0.0);
      }
    }
    best = std::min(best, std::abs(std::abs(h[0]) - p.mlp.f_trunc));
  }
  return best;
}

}  // namespace

TEST(SampleMask, Examples) {
  const auto all = sample_mask(50, 1.0, 3);
  EXPECT_EQ(all.count(), 50u);
  EXPECT_EQ(sample_mask(200, 0.4, 11).omega, sample_mask(200, 0.4, 11).omega);
  EXPECT_NE(sample_mask(200, 0.4, 11).omega, sample_mask(200, 0.4, 12).omega);
  const auto big = sample_mask(100000, 0.35, 5);
  EXPECT_NEAR(static_cast<double>(big.count()) / 1e5, 0.35, 0.01);
  EXPECT_EQ(big.pi, 0.35);
}

TEST(SampleMask, RejectsBadPi) {
  EXPECT_THROW(sample_mask(10, 0.0, 1), InputError);
  EXPECT_THROW(sample_mask(10, 1.2, 1), InputError);
  EXPECT_THROW(sample_mask(10, std::nan(""), 1), InputError);
}

TEST(MaskedMse, Examples) {
  Vector y(2), pred(2);
  y << 1, 0;
  pred << 0, 0;
  const MaskVector m{{1, 0}, 0.5};
  EXPECT_EQ(masked_mse(y, y, m), 0.0);
  EXPECT_DOUBLE_EQ(masked_mse(pred, y, m, LossNorm::over_n), 0.5);
  EXPECT_DOUBLE_EQ(masked_mse(pred, y, m, LossNorm::over_omega), 1.0);
  EXPECT_THROW(masked_mse(pred, y, MaskVector{{0, 0}, 0.5}), InputError);
  EXPECT_THROW(masked_mse(pred, Vector::Zero(3), m), InputError);
}

TEST(Gradients, ZeroAtInterpolation) {
  std::mt19937_64 rng(1);
  const auto g = ring(12, true);
  const auto op = propagation_operator(g, OperatorKind::sym_norm);
  Rng r(2);
  const auto p = init_gnn({2, 2, {{6}, 5.0}}, r);
  const Matrix x = random_matrix(12, 2, rng);
  const Vector y = gnn_predict(p, op, x);
  const auto lg = gradients(p, op, x, y, sample_mask(12, 0.6, 4));
  EXPECT_EQ(lg.loss, 0.0);
  for (double v : flat(lg.grad)) EXPECT_EQ(v, 0.0);
}

TEST(Gradients, TwoNodeHandChainRule) {
  const std::vector<Edge> e = {{0, 1}};
  const auto op = propagation_operator(build_graph(2, e, true), OperatorKind::raw_adj);
  const double w = 0.8, gam = 0.6, m = -1.3, b = 0.2;
  GnnParams p;
  p.gcn = {{Matrix::Constant(1, 1, w)}, {gam}};
  p.mlp.widths = {1, 1};
  p.mlp.M = {Matrix::Constant(1, 1, m)};
  p.mlp.b = {Vector::Constant(1, b)};
  p.mlp.f_trunc = 100.0;
  Matrix x(2, 1);
  x << 0.5, 2.0;
  Vector y(2);
  y << 1.0, -7.0;
  const MaskVector mask{{1, 0}, 0.5};
  // (A x)_0 = 2.5, z_0 = gam w 2.5, pred_0 = m z_0 + b, loss = (pred_0 - y_0)^2 / 2
  const double ax = 2.5, z0 = gam * w * ax, res = m * z0 + b - y[0];
  const auto lg = gradients(p, op, x, y, mask);
  EXPECT_NEAR(lg.loss, 0.5 * res * res, 1e-15);
  EXPECT_NEAR(lg.grad.mlp.b[0][0], res, 1e-14);
  EXPECT_NEAR(lg.grad.mlp.M[0](0, 0), res * z0, 1e-14);
  EXPECT_NEAR(lg.grad.gcn.W[0](0, 0), res * m * gam * ax, 1e-14);
  EXPECT_NEAR(lg.grad.gcn.gamma[0], res * m * w * ax, 1e-14);
}

TEST(Gradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const OperatorKind kinds[] = {OperatorKind::sym_norm, OperatorKind::row_norm, OperatorKind::raw_adj};
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::uint64_t draw = 0; checked < 100; ++draw) {
    ASSERT_LT(draw, 400u) << "too many draws rejected near kinks";
    const std::size_t n = 8 + draw % 7;
    const std::size_t d = 1 + draw % 3;
    const auto g = random_graph(n, 0.3, draw, draw % 2 == 0);
    bool isolated = false;
    for (NodeId i = 0; i < n; ++i) isolated |= g.neighbors(i).empty();
    if (isolated) continue;
    const auto op = propagation_operator(g, kinds[draw % 3]);
    Rng r(draw);
    std::vector<std::size_t> hidden(1 + draw % 2, 3 + draw % 3);
    auto p = init_gnn({d, 1 + draw % 3, {hidden, 1.0 + 1.5 * static_cast<double>(draw % 4)}}, r);
    for (auto& gm : p.gcn.gamma) gm = u(rng);
    for (auto& bb : p.mlp.b)
      for (Eigen::Index i = 0; i < bb.size(); ++i) bb[i] = 0.5 * u(rng);
    const Matrix x = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), rng, -2.0, 2.0);
    const Vector y = random_matrix(static_cast<Eigen::Index>(n), 1, rng, -2.0, 2.0).col(0);
    const auto mask = sample_mask(n, 0.7, draw);
    if (mask.count() == 0 || kink_distance(p, op, x) < 1e-3) continue;
    const LossNorm norm = draw % 2 ? LossNorm::over_n : LossNorm::over_omega;

    const auto analytic = flat(gradients(p, op, x, y, mask, norm).grad);
    const auto numeric = finite_difference(
        [&](const std::vector<double>& t) { return masked_mse(gnn_predict(with_flat(p, t), op, x), y, mask, norm); },
        flat(p), 1e-5);
    double scale = 1e-8, err = 0.0;
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      scale = std::max(scale, std::abs(numeric[k]));
      err = std::max(err, std::abs(numeric[k] - analytic[k]));
    }
    worst = std::max(worst, err / scale);
    ++checked;
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Gradients, MlpAndMultiscaleMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  const auto g = random_graph(10, 0.4, 3, true);
  const auto op = propagation_operator(g, OperatorKind::sym_norm);
  const Matrix x = random_matrix(10, 2, rng, -1.0, 1.0);
  const Vector y = random_matrix(10, 1, rng).col(0);
  const auto mask = sample_mask(10, 0.8, 1);
  Rng r(9);

  auto mlp = init_mlp(2, {{4}, 10.0}, r);
  auto mlp_flat = [](MlpParams q) {
    std::vector<double> v;
    for (auto& m : q.M) v.insert(v.end(), m.data(), m.data() + m.size());
    for (auto& b : q.b) v.insert(v.end(), b.data(), b.data() + b.size());
    return v;
  };
  auto mlp_set = [](MlpParams q, const std::vector<double>& v) {
    std::size_t k = 0;
    for (auto& m : q.M)
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = v[k++];
    for (auto& b : q.b)
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = v[k++];
    return q;
  };
  const auto ga = mlp_flat(gradients(mlp, x, y, mask).grad);
  const auto gn = finite_difference(
      [&](const std::vector<double>& t) { return masked_mse(mlp_forward_rows(mlp_set(mlp, t), x), y, mask); },
      mlp_flat(mlp), 1e-5);
  for (std::size_t k = 0; k < ga.size(); ++k) EXPECT_NEAR(ga[k], gn[k], 1e-7);

  auto ms = init_multiscale(2, 3, {{4}, 10.0}, r);
  ms.alpha << 0.3, -0.5, 0.1;
  const auto lg = gradients(ms, op, x, y, mask);
  for (Eigen::Index l = 0; l < 3; ++l) {
    auto up = ms, down = ms;
    up.alpha[l] += 1e-5;
    down.alpha[l] -= 1e-5;
    const double fd = (masked_mse(multiscale_forward(up, op, x), y, mask) -
                       masked_mse(multiscale_forward(down, op, x), y, mask)) / 2e-5;
    EXPECT_NEAR(lg.grad.alpha[l], fd, 1e-7);
  }
  for (Eigen::Index i = 0; i < ms.W.size(); ++i) {
    auto up = ms, down = ms;
    up.W.data()[i] += 1e-5;
    down.W.data()[i] -= 1e-5;
    const double fd = (masked_mse(multiscale_forward(up, op, x), y, mask) -
                       masked_mse(multiscale_forward(down, op, x), y, mask)) / 2e-5;
    EXPECT_NEAR(lg.grad.W.data()[i], fd, 1e-7);
  }
}

TEST(Gradients, MaskIsolation) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(15, 0.25, seed, true);
    const auto op = propagation_operator(g, OperatorKind::sym_norm);
    Rng r(seed);
    const auto p = init_gnn({2, 2, {{5}, 3.0}}, r);
    const Matrix x = random_matrix(15, 2, rng);
    Vector y = random_matrix(15, 1, rng).col(0);
    const auto mask = sample_mask(15, 0.5, seed);
    if (mask.count() == 0 || mask.count() == 15) continue;
    const auto before = gradients(p, op, x, y, mask);
    for (std::size_t i = 0; i < 15; ++i)
      if (!mask.observed(i)) y[static_cast<Eigen::Index>(i)] += 100.0;
    const auto after = gradients(p, op, x, y, mask);
    EXPECT_EQ(before.loss, after.loss);
    EXPECT_EQ(flat(before.grad), flat(after.grad));
  }
}

TEST(Objective, NormalizationsShareArgmin) {
  std::mt19937_64 rng(4);
  const auto g = ring(20, true);
  const auto op = propagation_operator(g, OperatorKind::neigh_avg);
  const Matrix x = random_matrix(20, 1, rng);
  const Vector y = random_matrix(20, 1, rng).col(0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto mask = sample_mask(20, 0.4, s);
    if (mask.count() == 0) continue;
    std::size_t best_n = 0, best_o = 0;
    double lo_n = 1e300, lo_o = 1e300;
    for (std::size_t c = 0; c < 30; ++c) {
      Rng r(100 * s + c);
      const Vector pred = gnn_predict(init_gnn({1, 2, {{4}, 5.0}}, r), op, x);
      const double a = masked_mse(pred, y, mask, LossNorm::over_n);
      const double b = masked_mse(pred, y, mask, LossNorm::over_omega);
      if (a < lo_n) lo_n = a, best_n = c;
      if (b < lo_o) lo_o = b, best_o = c;
    }
    EXPECT_EQ(best_n, best_o);
  }
}

TEST(Train, RealizableTargetStaysAtZero) {
  std::mt19937_64 rng(3);
  const auto g = ring(10, true);
  Rng r(1);
  const auto p = init_gnn({1, 2, {{4}, 5.0}}, r);
  const Matrix x = random_matrix(10, 1, rng);
  const Vector y = gnn_predict(p, propagation_operator(g, OperatorKind::sym_norm), x);
  const auto data = make_dataset(g, OperatorKind::sym_norm, x, y, MaskVector::full(10));
  TrainConfig cfg;
  cfg.epochs = 25;
  const auto fit = train_lse(p, data, cfg);
  ASSERT_EQ(fit.loss_trace.size(), 25u);
  for (double l : fit.loss_trace) EXPECT_EQ(l, 0.0);
}

TEST(Train, SgdOnLinearReadoutIsMonotone) {
  std::mt19937_64 rng(6);
  const auto g = ring(40, false);
  const Matrix x = random_matrix(40, 3, rng, -1.0, 1.0);
  Vector y = x * Vector::LinSpaced(3, -0.5, 0.5);
  y.array() += 0.1;
  const auto data = make_dataset(g, OperatorKind::neigh_avg, x, y, sample_mask(40, 0.8, 2));
  Rng r(5);
  const auto init = init_mlp(3, {{}, 100.0}, r);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::sgd;
  cfg.step_size = 0.1;
  cfg.epochs = 200;
  cfg.project = false;
  const auto fit = train_lse(init, data, cfg);
  for (std::size_t e = 1; e < fit.loss_trace.size(); ++e) EXPECT_LE(fit.loss_trace[e], fit.loss_trace[e - 1]);
  EXPECT_LT(fit.loss_trace.back(), 1e-3 * fit.loss_trace.front());
}

TEST(Train, DeterministicAndProjected) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 60, 2.0};
  spec.seed = 21;
  const auto data = make_synthetic(spec);
  Rng r1(4), r2(4);
  const auto a0 = init_gnn({1, 2, {{8}, 10.0}}, r1);
  const auto b0 = init_gnn({1, 2, {{8}, 10.0}}, r2);
  TrainConfig cfg;
  cfg.step_size = 0.2;
  for (std::size_t epochs : {1u, 2u, 5u, 40u}) {
    cfg.epochs = epochs;
    const auto a = train_lse(a0, data, cfg);
    const auto b = train_lse(b0, data, cfg);
    EXPECT_EQ(a.loss_trace, b.loss_trace);
    EXPECT_EQ(a.loss_trace.size(), epochs);
    for (double v : flat(a.params)) {
      EXPECT_LE(v, 1.0);
      EXPECT_GE(v, -1.0);
    }
    EXPECT_EQ(a.final_sparsity, effective_sparsity(a.params.mlp));
  }
}

TEST(Train, FrozenGamma) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 30, 2.0};
  const auto data = make_synthetic(spec);
  Rng r(2);
  const auto init = init_gnn({1, 3, {{4}, 5.0}}, r);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.train_gamma = false;
  EXPECT_EQ(train_lse(init, data, cfg).params.gcn.gamma, init.gcn.gamma);
}

TEST(Train, NonFiniteObjectiveRaises) {
  std::mt19937_64 rng(1);
  const auto g = ring(6, true);
  Vector y = Vector::Ones(6);
  y[2] = std::numeric_limits<double>::quiet_NaN();
  const auto data = make_dataset(g, OperatorKind::sym_norm, random_matrix(6, 1, rng), y, MaskVector::full(6));
  Rng r(1);
  TrainConfig cfg;
  cfg.epochs = 3;
  try {
    train_lse(init_gnn({1, 1, {{2}, 2.0}}, r), data, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.step_size = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_EQ(optimizer_from_string("sgd"), Optimizer::sgd);
  EXPECT_THROW(optimizer_from_string("rmsprop"), InputError);
}

TEST(Risk, Examples) {
  Vector ones = Vector::Ones(2);
  EXPECT_EQ(mean_squared_error(ones, ones), 0.0);
  EXPECT_DOUBLE_EQ(mean_squared_error(Vector::Zero(2), ones), 1.0);
  EXPECT_THROW(mean_squared_error(Vector::Zero(3), ones), InputError);

  MlpParams zero;
  zero.widths = {1, 1};
  zero.M = {Matrix::Zero(1, 1)};
  zero.b = {Vector::Zero(1)};
  EXPECT_DOUBLE_EQ(evaluate_risk(zero, Matrix::Ones(2, 1), ones), 1.0);
  EXPECT_THROW(evaluate_risk(zero, Matrix::Ones(3, 1), ones), InputError);
}

TEST(Risk, EmbeddedGeneratorIsExact) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 200, 2.0};
  spec.target = TargetKind::identity;
  spec.op_kind = OperatorKind::sym_norm;
  spec.theta = std::vector<double>{0.6, 0.4};
  spec.standardize_z = false;
  spec.seed = 8;
  const auto data = make_synthetic(spec);
  GnnParams p;
  p.gcn = embed_polynomial_as_gcn(FilterCoefficients::tight(*spec.theta), 3, 1);
  p.mlp.widths = {1, 1};
  p.mlp.M = {Matrix::Identity(1, 1)};
  p.mlp.b = {Vector::Zero(1)};
  p.mlp.f_trunc = 1e6;
  EXPECT_LT(evaluate_risk(p, data.op, data.x_fresh, data.y_clean_fresh), 1e-20);
}
