#include <gtest/gtest.h>

#include <cmath>

#include "gnnlab/datagen.hpp"
#include "gnnlab/errors.hpp"
#include "oracles.hpp"

using namespace gnnlab;
using namespace gnnlab::testing;

namespace {

double mean_degree(const SparseGraph& g) {
  return 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.size());
}

void expect_simple_symmetric(const SparseGraph& g) {
  EXPECT_FALSE(g.has_self_loops());
  for (NodeId i = 0; i < g.size(); ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      EXPECT_NE(nb[k], i);
      if (k > 0) EXPECT_LT(nb[k - 1], nb[k]);
      EXPECT_TRUE(g.has_edge(nb[k], i));
    }
  }
}

}  // namespace

TEST(Topology, RingIsTwoRegular) {
  const auto g = gen_topology({TopologyKind::ring, 5, 2.0, 1});
  for (NodeId i = 0; i < 5; ++i) EXPECT_EQ(g.degree(i), 2u);
  EXPECT_TRUE(g.has_edge(4, 0));
  EXPECT_THROW(gen_topology({TopologyKind::ring, 2, 2.0, 1}), InputError);
}

TEST(Topology, ErdosRenyiMeanDegree) {
  double total = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) total += mean_degree(gen_topology({TopologyKind::erdos_renyi, 10000, 2.0, s}));
  EXPECT_NEAR(total / 5.0, 2.0, 0.1);
  EXPECT_THROW(gen_topology({TopologyKind::erdos_renyi, 10, 10.0, 1}), InputError);
}

TEST(Topology, SbmDegenerateOverride) {
  TopologySpec spec{TopologyKind::sbm2, 4, 2.0, 3};
  spec.sbm_p_within = 1.0;
  spec.sbm_p_between = 0.0;
  const auto g = gen_topology(spec);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(2, 3));
}

TEST(Topology, SbmBlockRates) {
  const std::size_t n = 4000;
  const auto g = gen_topology({TopologyKind::sbm2, n, 10.0, 4});
  std::size_t within = 0, across = 0;
  for (const auto& e : g.edges()) ((e.u < n / 2) == (e.v < n / 2) ? within : across)++;
  // expected counts: 2 * C(n/2, 2) * 0.55 * 10 / n and (n/2)^2 * 0.055 * 10 / n
  const double ew = 2.0 * (n / 2.0) * (n / 2.0 - 1.0) / 2.0 * 5.5 / n;
  const double ea = (n / 2.0) * (n / 2.0) * 0.55 / n;
  EXPECT_NEAR(static_cast<double>(within), ew, 5.0 * std::sqrt(ew));
  EXPECT_NEAR(static_cast<double>(across), ea, 5.0 * std::sqrt(ea));
}

TEST(Topology, RggMeanDegreeBelowTargetFromBoundary) {
  const double md = mean_degree(gen_topology({TopologyKind::rgg, 5000, 8.0, 2}));
  EXPECT_GT(md, 7.0);
  EXPECT_LT(md, 8.2);
}

TEST(Topology, BarabasiAlbert) {
  const auto g = gen_topology({TopologyKind::barabasi_albert, 300, 4.0, 5});
  for (NodeId i = 0; i < g.size(); ++i) EXPECT_GE(g.degree(i), 2u);
  EXPECT_THROW(gen_topology({TopologyKind::barabasi_albert, 100, 1.5, 1}), InputError);

  double small = 0.0, large = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    small += static_cast<double>(gen_topology({TopologyKind::barabasi_albert, 500, 4.0, s}).max_degree());
    large += static_cast<double>(gen_topology({TopologyKind::barabasi_albert, 2000, 4.0, s}).max_degree());
  }
  EXPECT_GT(large, small);
}

TEST(Topology, AllKindsAreSimpleAndSeeded) {
  for (auto kind : {TopologyKind::ring, TopologyKind::erdos_renyi, TopologyKind::sbm2, TopologyKind::rgg,
                    TopologyKind::barabasi_albert}) {
    const TopologySpec spec{kind, 300, 6.0, 9};
    const auto g = gen_topology(spec);
    expect_simple_symmetric(g);
    EXPECT_EQ(g, gen_topology(spec));
    EXPECT_EQ(topology_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(topology_kind_from_string("lattice"), InputError);
}

TEST(Features, UniformAndGaussian) {
  const auto u = sample_features(200, 3, {}, 1);
  EXPECT_GE(u.minCoeff(), 0.0);
  EXPECT_LE(u.maxCoeff(), 1.0);
  EXPECT_EQ(u, sample_features(200, 3, {}, 1));

  const auto g = sample_features(25000, 4, {FeatureDistribution::Kind::gaussian, 1.0}, 2);
  const double mean = g.mean();
  const double var = (g.array() - mean).square().sum() / static_cast<double>(g.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.05);

  EXPECT_THROW(sample_features(10, 1, {FeatureDistribution::Kind::gaussian, 0.0}, 1), InputError);
  EXPECT_THROW(sample_features(0, 1, {}, 1), InputError);
}

TEST(Brownian, PathProperties) {
  const auto phi = brownian_target(7, 1.0);
  const auto& grid = phi.grid_values();
  ASSERT_EQ(grid.size(), HolderTarget::kIntervals + 1);
  EXPECT_EQ(grid[0], 0.0);
  EXPECT_EQ(phi.path(0.0), 0.0);
  EXPECT_EQ(phi.path(1.0), grid.back());
  EXPECT_NEAR(phi.path(0.5 / 4096.0), 0.5 * grid[1], 1e-15);

  double ss = 0.0, s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = grid[i] - grid[i - 1];
    s += d;
    ss += d * d;
  }
  const double m = s / 4096.0;
  const double var = (ss - 4096.0 * m * m) / 4095.0;
  EXPECT_NEAR(var / std::ldexp(1.0, -12), 1.0, 0.2);

  EXPECT_NEAR(phi(1e4), grid.back(), 1e-12);
  EXPECT_NEAR(phi(-1e4), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(phi(0.0), phi.path(0.5));
}

TEST(Brownian, ScaleEntersTheSigmoid) {
  const auto a = brownian_target(3, 1.0);
  const auto b = brownian_target(3, 2.0);
  EXPECT_EQ(a.grid_values(), b.grid_values());
  EXPECT_DOUBLE_EQ(b(1.4), a(0.7));
  EXPECT_THROW(HolderTarget(a.grid_values(), 0.0), InputError);
}

TEST(RandomDnn, Examples) {
  const auto f = random_dnn_target(3, 2, 8, 11);
  Vector z(3);
  z << 0.2, -1.0, 0.4;
  EXPECT_EQ(f(z), random_dnn_target(3, 2, 8, 11)(z));
  EXPECT_NE(f(z), random_dnn_target(3, 2, 8, 12)(z));

  const RandomDnnTarget zero_bias(4, 1, 6, 5, true);
  EXPECT_EQ(zero_bias(Vector::Zero(4)), 0.0);

  const Matrix rows = sample_features(50, 3, {FeatureDistribution::Kind::gaussian, 1.0}, 4);
  const Vector batch = f.evaluate_rows(rows);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) EXPECT_EQ(batch[i], f(rows.row(i).transpose()));
  EXPECT_THROW(random_dnn_target(3, 0, 8, 1), InputError);
}

TEST(Standardize, MeanZeroUnitStd) {
  const Vector v = random_dnn_target(2, 2, 8, 3).evaluate_rows(sample_features(300, 2, {}, 2));
  double mean = 0.0, sd = 0.0;
  const Vector s = standardize(v, &mean, &sd);
  EXPECT_NEAR(s.mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt((s.array() - s.mean()).square().sum() / 299.0), 1.0, 1e-12);
  EXPECT_NEAR(mean, v.mean(), 1e-12);
  EXPECT_THROW(standardize(Vector::Ones(1)), InputError);
}

TEST(DrawFilter, UnitL1) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto t = draw_filter(1 + s % 5, s);
    double l1 = 0.0;
    for (double v : t) {
      EXPECT_GE(v, 0.0);
      l1 += std::abs(v);
    }
    EXPECT_NEAR(l1, 1.0, 1e-12);
  }
}

TEST(MakeSynthetic, NoiselessFullMask) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 50, 2.0};
  spec.noise_sigma = 0.0;
  spec.pi = 1.0;
  const auto ds = make_synthetic(spec);
  EXPECT_EQ(ds.y, ds.y_clean);
  EXPECT_EQ(ds.mask.count(), 50u);
  EXPECT_NO_THROW(ds.validate());
}

TEST(MakeSynthetic, RingIdentityTargetIsNeighbourhoodAverage) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 8, 2.0};
  spec.filter_order = 1;
  spec.theta = std::vector<double>{1.0};
  spec.target = TargetKind::identity;
  spec.op_kind = OperatorKind::neigh_avg;
  spec.standardize_z = false;
  const auto ds = make_synthetic(spec);
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double avg = (ds.x((i + 7) % 8, 0) + ds.x(i, 0) + ds.x((i + 1) % 8, 0)) / 3.0;
    EXPECT_NEAR(ds.y_clean[i], avg, 1e-15);
  }
}

TEST(MakeSynthetic, ReproducibleAndNoiseOnTrainingCopyOnly) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::erdos_renyi, 400, 4.0};
  spec.target = TargetKind::random_dnn;
  spec.op_kind = OperatorKind::sym_norm;
  spec.dim = 3;
  spec.seed = 99;
  spec.pi = 0.6;
  const auto a = make_synthetic(spec);
  const auto b = make_synthetic(spec);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.x_fresh, b.x_fresh);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.y_clean_fresh, b.y_clean_fresh);
  EXPECT_EQ(a.mask.omega, b.mask.omega);
  EXPECT_EQ(a.meta, b.meta);

  const Vector noise = a.y - a.y_clean;
  EXPECT_NEAR(noise.mean(), 0.0, 0.2);
  EXPECT_NEAR(std::sqrt(noise.squaredNorm() / 400.0), 1.0, 0.15);
  EXPECT_NEAR(a.y_clean.mean(), 0.0, 1e-12);
  EXPECT_TRUE(a.graph.has_self_loops());
  EXPECT_EQ(a.meta["theta"].size(), 2u);

  spec.seed = 100;
  EXPECT_NE(make_synthetic(spec).x, a.x);
}

TEST(MakeSynthetic, FreshCopyIsExchangeable) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 20000, 2.0};
  const auto ds = make_synthetic(spec);
  EXPECT_NE(ds.x, ds.x_fresh);
  EXPECT_NEAR(ds.x.mean(), ds.x_fresh.mean(), 0.01);
  EXPECT_NEAR(ds.y_clean.mean(), ds.y_clean_fresh.mean(), 0.05);
  const double va = (ds.y_clean.array() - ds.y_clean.mean()).square().mean();
  const double vb = (ds.y_clean_fresh.array() - ds.y_clean_fresh.mean()).square().mean();
  EXPECT_NEAR(va / vb, 1.0, 0.1);
}

TEST(MakeSynthetic, FixedTargetSeedHoldsPhi) {
  SyntheticSpec spec;
  spec.topology = {TopologyKind::ring, 30, 2.0};
  spec.target_seed = 5;
  spec.seed = 1;
  const auto a = make_synthetic(spec);
  spec.seed = 2;
  const auto b = make_synthetic(spec);
  EXPECT_EQ(a.meta["target_seed"], b.meta["target_seed"]);
  EXPECT_NE(a.x, b.x);
}
