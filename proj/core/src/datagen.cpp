#include "gnnlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include <fmt/format.h>

#include "gnnlab/errors.hpp"

namespace gnnlab {

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::erdos_renyi: return "erdos_renyi";
    case TopologyKind::sbm2: return "sbm2";
    case TopologyKind::rgg: return "rgg";
    case TopologyKind::barabasi_albert: return "barabasi_albert";
  }
  return "ring";
}

TopologyKind topology_kind_from_string(std::string_view name) {
  for (auto k : {TopologyKind::ring, TopologyKind::erdos_renyi, TopologyKind::sbm2, TopologyKind::rgg,
                 TopologyKind::barabasi_albert}) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown topology '{}'", name));
}

namespace {

/// Bernoulli(p) over pairs (i, j), i < j, restricted to a predicate-defined
/// block, by geometric skipping over the linearized pair index.
template <class Accept>
void bernoulli_pairs(std::size_t n, double p, Rng& rng, std::vector<Edge>& out, Accept&& accept) {
  if (p <= 0.0) return;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (p >= 1.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (accept(i, j)) out.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    return;
  }
  const double log_q = std::log1p(-p);
  // Batagelj-Brandes: walk (v, w) with w < v
  long long v = 1, w = -1;
  const auto nn = static_cast<long long>(n);
  while (v < nn) {
    const double r = 1.0 - u(rng);
    w += 1 + static_cast<long long>(std::floor(std::log(r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn && accept(static_cast<std::size_t>(w), static_cast<std::size_t>(v))) {
      out.push_back({static_cast<NodeId>(w), static_cast<NodeId>(v)});
    }
  }
}

std::vector<Edge> ring_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i) e.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n)});
  return e;
}

std::vector<Edge> barabasi_albert_edges(std::size_t n, std::size_t m, Rng& rng) {
  // star on m + 1 nodes, then each arrival attaches to m distinct targets drawn
  // proportionally to degree
  std::vector<Edge> edges;
  std::vector<NodeId> repeated;
  for (std::size_t j = 1; j <= m; ++j) {
    edges.push_back({0, static_cast<NodeId>(j)});
    repeated.push_back(0);
    repeated.push_back(static_cast<NodeId>(j));
  }
  std::vector<NodeId> targets;
  for (std::size_t src = m + 1; src < n; ++src) {
    targets.clear();
    std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
    while (targets.size() < m) {
      const NodeId t = repeated[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      edges.push_back({static_cast<NodeId>(src), t});
      repeated.push_back(t);
      repeated.push_back(static_cast<NodeId>(src));
    }
  }
  return edges;
}

}  // namespace

SparseGraph gen_topology(const TopologySpec& spec) {
  const std::size_t n = spec.n;
  const double deg = spec.avg_degree;
  Rng rng(spec.seed);
  std::vector<Edge> edges;
  switch (spec.kind) {
    case TopologyKind::ring:
      if (n < 3) throw InputError("ring topology needs n >= 3");
      edges = ring_edges(n);
      break;
    case TopologyKind::erdos_renyi:
      if (!(deg > 0.0 && deg < static_cast<double>(n))) {
        throw InputError(fmt::format("erdos_renyi: average degree {} must lie in (0, n = {})", deg, n));
      }
      bernoulli_pairs(n, deg / static_cast<double>(n), rng, edges, [](auto, auto) { return true; });
      break;
    case TopologyKind::sbm2: {
      if (n < 2) throw InputError("sbm2 needs n >= 2");
      if (!(deg > 0.0 && deg < static_cast<double>(n)) && !(spec.sbm_p_within && spec.sbm_p_between)) {
        throw InputError(fmt::format("sbm2: average degree {} must lie in (0, n = {})", deg, n));
      }
      const double p_in = spec.sbm_p_within.value_or(0.55 * deg / static_cast<double>(n));
      const double p_out = spec.sbm_p_between.value_or(0.055 * deg / static_cast<double>(n));
      if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) throw InputError("sbm2: probabilities outside [0, 1]");
      const std::size_t half = n / 2;
      auto block = [half](std::size_t i) { return i < half ? 0 : 1; };
      bernoulli_pairs(n, p_in, rng, edges, [&](auto i, auto j) { return block(i) == block(j); });
      bernoulli_pairs(n, p_out, rng, edges, [&](auto i, auto j) { return block(i) != block(j); });
      break;
    }
    case TopologyKind::rgg: {
      if (n < 2 || !(deg > 0.0)) throw InputError("rgg: need n >= 2 and positive average degree");
      const double radius = std::sqrt(deg / (std::numbers::pi * static_cast<double>(n)));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<std::pair<double, double>> pts(n);
      for (auto& [x, y] : pts) {
        x = u(rng);
        y = u(rng);
      }
      const double r2 = radius * radius;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double dx = pts[i].first - pts[j].first, dy = pts[i].second - pts[j].second;
          if (dx * dx + dy * dy <= r2) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
        }
      }
      break;
    }
    case TopologyKind::barabasi_albert: {
      const auto m = static_cast<std::size_t>(std::floor(deg / 2.0));
      if (m < 1) throw InputError(fmt::format("barabasi_albert: floor({} / 2) must be at least 1", deg));
      if (n <= m) throw InputError(fmt::format("barabasi_albert: n = {} must exceed m = {}", n, m));
      edges = barabasi_albert_edges(n, m, rng);
      break;
    }
  }
  return build_graph(n, edges, false);
}

FeatureMatrix sample_features(std::size_t n, std::size_t d, const FeatureDistribution& dist, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InputError("sample_features: dimensions must be positive");
  Rng rng(seed);
  FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (dist.kind == FeatureDistribution::Kind::uniform01) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  } else {
    if (!(dist.sigma > 0.0) || !std::isfinite(dist.sigma)) {
      throw InputError(fmt::format("sample_features: sigma = {} must be positive", dist.sigma));
    }
    std::normal_distribution<double> g(0.0, dist.sigma);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  }
  return x;
}

HolderTarget::HolderTarget(std::vector<double> grid_values, double scale)
    : grid_(std::move(grid_values)), scale_(scale) {
  if (grid_.size() != kIntervals + 1) throw InputError("HolderTarget: grid must have 2^12 + 1 values");
  if (!(scale_ > 0.0)) throw InputError("HolderTarget: scale must be positive");
}

double HolderTarget::path(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * static_cast<double>(kIntervals);
  const auto k = std::min(static_cast<std::size_t>(pos), kIntervals - 1);
  const double frac = pos - static_cast<double>(k);
  return grid_[k] + frac * (grid_[k + 1] - grid_[k]);
}

double HolderTarget::operator()(double z) const { return path(1.0 / (1.0 + std::exp(-z / scale_))); }

HolderTarget brownian_target(std::uint64_t seed, double scale) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(1.0 / static_cast<double>(HolderTarget::kIntervals)));
  std::vector<double> grid(HolderTarget::kIntervals + 1, 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) grid[k] = grid[k - 1] + g(rng);
  return HolderTarget(std::move(grid), scale);
}

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

RandomDnnTarget::RandomDnnTarget(std::size_t dim, std::size_t depth, std::size_t width, std::uint64_t seed,
                                 bool zero_biases) {
  if (depth < 1) throw InputError("random_dnn_target: depth must be at least 1");
  if (dim == 0 || width == 0) throw InputError("random_dnn_target: dimensions must be positive");
  Rng rng(seed);
  const auto w = static_cast<Eigen::Index>(width);
  input_ = gaussian_matrix(w, static_cast<Eigen::Index>(dim), rng);
  std::normal_distribution<double> bias(0.0, zero_biases ? 0.0 : 0.1);
  for (std::size_t l = 0; l < depth; ++l) {
    blocks_.push_back(gaussian_matrix(w, w, rng));
    Vector c(w);
    for (auto& v : c) v = zero_biases ? 0.0 : bias(rng);
    biases_.push_back(std::move(c));
  }
  out_ = gaussian_matrix(1, w, rng).row(0).transpose();
  out_bias_ = zero_biases ? 0.0 : bias(rng);
}

double RandomDnnTarget::operator()(const Eigen::Ref<const Vector>& z) const {
  if (z.size() != input_.cols()) throw InputError("random_dnn_target: input width mismatch");
  Vector h = input_ * z;
  for (std::size_t l = 0; l < blocks_.size(); ++l) h += (blocks_[l] * h + biases_[l]).cwiseMax(0.0);
  return out_.dot(h) + out_bias_;
}

Vector RandomDnnTarget::evaluate_rows(const Matrix& z) const {
  Vector out(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out[i] = (*this)(z.row(i).transpose());
  return out;
}

RandomDnnTarget random_dnn_target(std::size_t dim, std::size_t depth, std::size_t width, std::uint64_t seed) {
  return RandomDnnTarget(dim, depth, width, seed);
}

Vector standardize(const Vector& v, double* mean_out, double* std_out) {
  if (v.size() < 2) throw InputError("standardize: need at least two values");
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
  if (mean_out) *mean_out = mean;
  if (std_out) *std_out = sd;
  if (!(sd > 0.0)) return Vector::Zero(v.size());
  return ((v.array() - mean) / sd).matrix();
}

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::brownian: return "brownian";
    case TargetKind::random_dnn: return "random_dnn";
    case TargetKind::identity: return "identity";
  }
  return "brownian";
}

TargetKind target_kind_from_string(std::string_view name) {
  for (auto k : {TargetKind::brownian, TargetKind::random_dnn, TargetKind::identity}) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown target kind '{}'", name));
}

std::vector<double> draw_filter(std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InputError("draw_filter: order must be at least 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> theta(k);
  double sum = 0.0;
  for (auto& t : theta) sum += (t = u(rng));
  if (sum == 0.0) {
    std::fill(theta.begin(), theta.end(), 1.0 / static_cast<double>(k));
    return theta;
  }
  for (auto& t : theta) t /= sum;
  return theta;
}

namespace {

enum Stream : std::uint64_t { kGraph = 1, kFeatures, kFresh, kTheta, kTarget, kNoise, kMask };

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.dim == 0) throw InputError("make_synthetic: dimension must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw InputError("make_synthetic: noise sigma must be non-negative");

  TopologySpec topo = spec.topology;
  topo.seed = derive_seed(spec.seed, kGraph);
  SparseGraph base = gen_topology(topo);

  Dataset ds;
  ds.graph = spec.self_loops ? base.with_self_loops() : base;
  ds.op = propagation_operator(ds.graph, spec.op_kind);

  const bool dnn = spec.target == TargetKind::random_dnn;
  const FeatureDistribution feat = spec.features.value_or(
      dnn ? FeatureDistribution{FeatureDistribution::Kind::gaussian, 1.0} : FeatureDistribution{});
  const std::size_t n = base.size();
  ds.x = sample_features(n, spec.dim, feat, derive_seed(spec.seed, kFeatures));
  ds.x_fresh = sample_features(n, spec.dim, feat, derive_seed(spec.seed, kFresh));

  std::vector<double> theta = spec.theta ? *spec.theta : draw_filter(spec.filter_order, derive_seed(spec.seed, kTheta));
  const auto coeffs = FilterCoefficients::tight(theta);
  Matrix z = polynomial_propagate(ds.op, coeffs, ds.x);
  Matrix z_fresh = polynomial_propagate(ds.op, coeffs, ds.x_fresh);

  if (spec.standardize_z.value_or(dnn)) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      double mean = 0.0, sd = 0.0;
      z.col(c) = standardize(z.col(c), &mean, &sd);
      z_fresh.col(c) = sd > 0.0 ? Vector((z_fresh.col(c).array() - mean) / sd) : Vector(Vector::Zero(z.rows()));
    }
  }

  const std::uint64_t target_seed = spec.target_seed.value_or(derive_seed(spec.seed, kTarget));
  switch (spec.target) {
    case TargetKind::brownian: {
      const auto phi = brownian_target(target_seed, spec.brownian_scale);
      auto eval = [&](const Matrix& zz) {
        Vector out(zz.rows());
        for (Eigen::Index i = 0; i < zz.rows(); ++i) out[i] = phi(zz.row(i).mean());
        return out;
      };
      ds.y_clean = eval(z);
      ds.y_clean_fresh = eval(z_fresh);
      break;
    }
    case TargetKind::identity:
      ds.y_clean = z.rowwise().mean();
      ds.y_clean_fresh = z_fresh.rowwise().mean();
      break;
    case TargetKind::random_dnn: {
      const auto phi = random_dnn_target(spec.dim, spec.dnn_depth, spec.dnn_width, target_seed);
      double mean = 0.0, sd = 0.0;
      ds.y_clean = standardize(phi.evaluate_rows(z), &mean, &sd);
      Vector raw_fresh = phi.evaluate_rows(z_fresh);
      ds.y_clean_fresh = sd > 0.0 ? Vector((raw_fresh.array() - mean) / sd) : Vector(Vector::Zero(raw_fresh.size()));
      break;
    }
  }

  ds.y = ds.y_clean;
  if (spec.noise_sigma > 0.0) {
    Rng rng(derive_seed(spec.seed, kNoise));
    std::normal_distribution<double> eps(0.0, spec.noise_sigma);
    for (auto& v : ds.y) v += eps(rng);
  }
  ds.mask = sample_mask(n, spec.pi, derive_seed(spec.seed, kMask));

  ds.meta = {
      {"source", "synthetic"},
      {"transductive", false},
      {"topology", to_string(spec.topology.kind)},
      {"n", n},
      {"avg_degree", spec.topology.avg_degree},
      {"dim", spec.dim},
      {"filter_order", theta.size()},
      {"theta", theta},
      {"target", to_string(spec.target)},
      {"operator", to_string(spec.op_kind)},
      {"self_loops", spec.self_loops},
      {"pi", spec.pi},
      {"noise_sigma", spec.noise_sigma},
      {"seed", spec.seed},
      {"target_seed", target_seed},
      {"brownian_scale", spec.brownian_scale},
      {"dnn_depth", spec.dnn_depth},
      {"dnn_width", spec.dnn_width},
      {"features", feat.kind == FeatureDistribution::Kind::uniform01 ? "uniform01" : "gaussian"},
      {"feature_sigma", feat.sigma},
      {"standardize_z", spec.standardize_z.value_or(dnn)},
      {"max_degree", ds.graph.max_degree()},
      {"laplacian_energy", laplacian_energy(base, ds.y_clean)},
  };
  return ds;
}

}  // namespace gnnlab
