#include "gnnlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "gnnlab/baselines.hpp"
#include "gnnlab/errors.hpp"
#include "gnnlab/ingest.hpp"
#include "gnnlab/mask.hpp"
#include "gnnlab/model.hpp"
#include "gnnlab/serialize.hpp"
#include "gnnlab/theory.hpp"

namespace gnnlab {

using json = nlohmann::json;

// ---- names -------------------------------------------------------------------

namespace {

constexpr std::pair<Study, std::string_view> kStudies[] = {
    {Study::convergence, "convergence"}, {Study::label_fraction, "label_fraction"}, {Study::topology, "topology"},
    {Study::degree, "degree"},           {Study::real, "real"}};

constexpr std::pair<Method, std::string_view> kMethods[] = {
    {Method::gnn_skip, "gnn_skip"}, {Method::gnn_noskip, "gnn_noskip"}, {Method::mlp, "mlp"},
    {Method::tikhonov, "tikhonov"}, {Method::label_prop, "label_prop"}, {Method::multiscale, "multiscale"}};

template <class E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
  for (const auto& [e, s] : table)
    if (e == value) return s;
  return "?";
}

template <class E, std::size_t N>
E parse_name(const std::pair<E, std::string_view> (&table)[N], std::string_view name, std::string_view what) {
  for (const auto& [e, s] : table)
    if (s == name) return e;
  throw InputError(fmt::format("unknown {} '{}'", what, name));
}

}  // namespace

std::string_view to_string(Study s) { return name_of(kStudies, s); }
Study study_from_string(std::string_view name) { return parse_name(kStudies, name, "study"); }
std::string_view to_string(Method m) { return name_of(kMethods, m); }
Method method_from_string(std::string_view name) { return parse_name(kMethods, name, "method"); }

// ---- configuration -------------------------------------------------------------

namespace {

bool synthetic_convergence(Study s) { return s == Study::convergence || s == Study::label_fraction; }

TargetKind data_target(const ExperimentConfig& cfg) {
  return cfg.data.target.value_or(synthetic_convergence(cfg.study) ? TargetKind::brownian : TargetKind::random_dnn);
}

OperatorKind data_operator(const ExperimentConfig& cfg) {
  return cfg.data.op_kind.value_or(synthetic_convergence(cfg.study) ? OperatorKind::neigh_avg
                                                                    : OperatorKind::sym_norm);
}

std::vector<OperatorKind> degree_operators(const ExperimentConfig& cfg) {
  if (!cfg.operators.empty()) return cfg.operators;
  return {OperatorKind::sym_norm, OperatorKind::row_norm, OperatorKind::raw_adj};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_grid.empty() || pi_grid.empty() || degree_grid.empty()) throw InputError("experiment: grids must be nonempty");
  if (trials < 1) throw InputError("experiment: trials must be at least 1");
  if (methods.empty()) throw InputError("experiment: methods must be nonempty");
  if (topologies.empty()) throw InputError("experiment: topologies must be nonempty");
  for (auto n : n_grid)
    if (n < 3) throw InputError(fmt::format("experiment: n = {} is too small", n));
  for (auto p : pi_grid)
    if (!(p > 0.0 && p <= 1.0)) throw InputError(fmt::format("experiment: pi = {} outside (0, 1]", p));
  for (auto d : degree_grid)
    if (!(d > 0.0)) throw InputError(fmt::format("experiment: average degree {} must be positive", d));
  if (model.gcn_depth < 1) throw InputError("experiment: gcn_depth must be at least 1");
  if (model.multiscale_hops < 1) throw InputError("experiment: multiscale_hops must be at least 1");
  if (data.dim < 1 || data.filter_order < 1) throw InputError("experiment: dim and filter_order must be positive");
  if (study == Study::real) {
    for (auto p : pi_grid)
      if (p >= 1.0) throw InputError("experiment: the real study needs pi < 1 to leave held-out nodes");
    if (!(data.calibration_fraction > 0.0 && data.calibration_fraction < 1.0)) {
      throw InputError("experiment: calibration_fraction must lie in (0, 1)");
    }
    if (data.depth_grid.empty()) throw InputError("experiment: depth_grid must be nonempty");
  }
  train.validate();
}

namespace {

template <class T>
T get_as(const json& v, std::string_view key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

template <class E, class Parse>
std::vector<E> enum_list(const json& v, std::string_view key, Parse parse) {
  std::vector<E> out;
  for (const auto& s : get_as<std::vector<std::string>>(v, key)) out.push_back(parse(s));
  return out;
}

void read_data(DataConfig& d, const json& j) {
  for (const auto& [key, v] : j.items()) {
    if (key == "dim") d.dim = get_as<std::size_t>(v, key);
    else if (key == "filter_order") d.filter_order = get_as<std::size_t>(v, key);
    else if (key == "target") d.target = target_kind_from_string(get_as<std::string>(v, key));
    else if (key == "operator") d.op_kind = operator_kind_from_string(get_as<std::string>(v, key));
    else if (key == "noise_sigma") d.noise_sigma = get_as<double>(v, key);
    else if (key == "brownian_scale") d.brownian_scale = get_as<double>(v, key);
    else if (key == "dnn_depth") d.dnn_depth = get_as<std::size_t>(v, key);
    else if (key == "dnn_width") d.dnn_width = get_as<std::size_t>(v, key);
    else if (key == "dataset") d.dataset = get_as<std::string>(v, key);
    else if (key == "csv_path") d.csv_path = get_as<std::string>(v, key);
    else if (key == "edges_path") d.edges_path = get_as<std::string>(v, key);
    else if (key == "features_path") d.features_path = get_as<std::string>(v, key);
    else if (key == "target_path") d.target_path = get_as<std::string>(v, key);
    else if (key == "knn_k") d.knn_k = get_as<std::size_t>(v, key);
    else if (key == "top_features") d.top_features = get_as<std::size_t>(v, key);
    else if (key == "calibration_fraction") d.calibration_fraction = get_as<double>(v, key);
    else if (key == "depth_grid") d.depth_grid = get_as<std::vector<std::size_t>>(v, key);
    else throw FormatError(fmt::format("data config: unknown key '{}'", key));
  }
}

void read_model(ModelConfig& m, const json& j) {
  for (const auto& [key, v] : j.items()) {
    if (key == "gcn_depth") m.gcn_depth = get_as<std::size_t>(v, key);
    else if (key == "hidden") m.hidden = get_as<std::vector<std::size_t>>(v, key);
    else if (key == "f_trunc") m.f_trunc = get_as<double>(v, key);
    else if (key == "multiscale_hops") m.multiscale_hops = get_as<std::size_t>(v, key);
    else if (key == "tikhonov_lambda") m.tikhonov_lambda = get_as<double>(v, key);
    else if (key == "label_prop_alpha") m.label_prop_alpha = get_as<double>(v, key);
    else if (key == "label_prop_iters") m.label_prop_iters = get_as<std::size_t>(v, key);
    else throw FormatError(fmt::format("model config: unknown key '{}'", key));
  }
}

TrainConfig experiment_train_defaults() { return ExperimentConfig{}.train; }

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("experiment config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "study") c.study = study_from_string(get_as<std::string>(v, key));
    else if (key == "n_grid") c.n_grid = get_as<std::vector<std::size_t>>(v, key);
    else if (key == "pi_grid") c.pi_grid = get_as<std::vector<double>>(v, key);
    else if (key == "degree_grid") c.degree_grid = get_as<std::vector<double>>(v, key);
    else if (key == "topologies")
      c.topologies = enum_list<TopologyKind>(v, key, [](const std::string& s) { return topology_kind_from_string(s); });
    else if (key == "operators")
      c.operators = enum_list<OperatorKind>(v, key, [](const std::string& s) { return operator_kind_from_string(s); });
    else if (key == "trials") c.trials = get_as<std::size_t>(v, key);
    else if (key == "methods")
      c.methods = enum_list<Method>(v, key, [](const std::string& s) { return method_from_string(s); });
    else if (key == "master_seed") c.master_seed = get_as<std::uint64_t>(v, key);
    else if (key == "out_dir") c.out_dir = get_as<std::string>(v, key);
    else if (key == "workers") c.workers = get_as<std::size_t>(v, key);
    else if (key == "data") read_data(c.data, v);
    else if (key == "model") read_model(c.model, v);
    else if (key == "train") {
      json merged = json::object();
      const auto defaults = experiment_train_defaults();
      merged["epochs"] = defaults.epochs;
      for (const auto& [k2, v2] : v.items()) merged[k2] = v2;
      c.train = train_config_from_json(merged);
    } else {
      throw FormatError(fmt::format("experiment config: unknown key '{}'", key));
    }
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  auto names = [](const auto& list) {
    std::vector<std::string> out;
    for (auto v : list) out.emplace_back(to_string(v));
    return out;
  };
  json data = {{"dim", c.data.dim},
               {"filter_order", c.data.filter_order},
               {"noise_sigma", c.data.noise_sigma},
               {"brownian_scale", c.data.brownian_scale},
               {"dnn_depth", c.data.dnn_depth},
               {"dnn_width", c.data.dnn_width},
               {"dataset", c.data.dataset},
               {"csv_path", c.data.csv_path},
               {"edges_path", c.data.edges_path},
               {"features_path", c.data.features_path},
               {"target_path", c.data.target_path},
               {"knn_k", c.data.knn_k},
               {"top_features", c.data.top_features},
               {"calibration_fraction", c.data.calibration_fraction},
               {"depth_grid", c.data.depth_grid}};
  if (c.data.target) data["target"] = to_string(*c.data.target);
  if (c.data.op_kind) data["operator"] = to_string(*c.data.op_kind);
  return {{"study", to_string(c.study)},
          {"n_grid", c.n_grid},
          {"pi_grid", c.pi_grid},
          {"degree_grid", c.degree_grid},
          {"topologies", names(c.topologies)},
          {"operators", names(c.operators)},
          {"trials", c.trials},
          {"methods", names(c.methods)},
          {"master_seed", c.master_seed},
          {"out_dir", c.out_dir.string()},
          {"workers", c.workers},
          {"data", data},
          {"model",
           {{"gcn_depth", c.model.gcn_depth},
            {"hidden", c.model.hidden},
            {"f_trunc", c.model.f_trunc},
            {"multiscale_hops", c.model.multiscale_hops},
            {"tikhonov_lambda", c.model.tikhonov_lambda},
            {"label_prop_alpha", c.model.label_prop_alpha},
            {"label_prop_iters", c.model.label_prop_iters}}},
          {"train", to_json(c.train)}};
}

// ---- cells and seeds -------------------------------------------------------------

std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& key) {
  std::uint64_t s = derive_seed(master_seed, static_cast<std::uint64_t>(key.study));
  s = derive_seed(s, static_cast<std::uint64_t>(key.topology));
  s = derive_seed(s, key.n);
  s = derive_seed(s, std::bit_cast<std::uint64_t>(key.pi));
  s = derive_seed(s, std::bit_cast<std::uint64_t>(key.avg_degree));
  s = derive_seed(s, static_cast<std::uint64_t>(key.op));
  return derive_seed(s, key.trial);
}

namespace {

// The target function and filter are held fixed across the factor grid within
// a trial; graph, features, noise and mask are redrawn per cell.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(derive_seed(master_seed, 0x7472696171ULL), trial);
}

}  // namespace

std::vector<CellKey> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellKey> cells;
  CellKey base;
  base.study = cfg.study;
  base.topology = cfg.topologies.front();
  base.n = cfg.n_grid.front();
  base.pi = cfg.pi_grid.front();
  base.avg_degree = cfg.degree_grid.front();
  base.op = data_operator(cfg);
  auto push_trials = [&](CellKey k) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      k.trial = t;
      cells.push_back(k);
    }
  };
  switch (cfg.study) {
    case Study::convergence:
    case Study::label_fraction:
      for (auto n : cfg.n_grid)
        for (auto pi : cfg.pi_grid) {
          auto k = base;
          k.n = n;
          k.pi = pi;
          push_trials(k);
        }
      break;
    case Study::topology:
      for (auto topo : cfg.topologies)
        for (auto pi : cfg.pi_grid) {
          auto k = base;
          k.topology = topo;
          k.pi = pi;
          push_trials(k);
        }
      break;
    case Study::degree:
      for (auto deg : cfg.degree_grid)
        for (auto op : degree_operators(cfg)) {
          auto k = base;
          k.topology = TopologyKind::barabasi_albert;
          k.avg_degree = deg;
          k.op = op;
          push_trials(k);
        }
      break;
    case Study::real:
      for (auto pi : cfg.pi_grid) {
        auto k = base;
        k.pi = pi;
        push_trials(k);
      }
      break;
  }
  return cells;
}

Dataset cell_dataset(const ExperimentConfig& cfg, const CellKey& key) {
  SyntheticSpec s;
  s.topology.kind = key.topology;
  s.topology.n = key.n;
  s.topology.avg_degree = key.avg_degree;
  s.dim = cfg.data.dim;
  s.filter_order = cfg.data.filter_order;
  s.target = data_target(cfg);
  s.op_kind = key.op;
  s.pi = key.pi;
  s.noise_sigma = cfg.data.noise_sigma;
  s.seed = cell_seed(cfg.master_seed, key);
  s.brownian_scale = cfg.data.brownian_scale;
  s.dnn_depth = cfg.data.dnn_depth;
  s.dnn_width = cfg.data.dnn_width;
  const auto fixed = trial_seed(cfg.master_seed, key.trial);
  s.theta = draw_filter(cfg.data.filter_order, derive_seed(fixed, 1));
  s.target_seed = derive_seed(fixed, 2);
  return make_synthetic(s);
}

Dataset load_real_dataset(const ExperimentConfig& cfg) {
  IngestOptions opts;
  opts.op_kind = cfg.data.op_kind.value_or(OperatorKind::sym_norm);
  if (cfg.data.dataset == "california") {
    if (cfg.data.csv_path.empty()) throw InputError("real study: data.csv_path is required for california");
    return ingest_california(cfg.data.csv_path, cfg.data.knn_k, opts);
  }
  if (cfg.data.dataset == "chameleon") {
    if (cfg.data.edges_path.empty() || cfg.data.features_path.empty() || cfg.data.target_path.empty()) {
      throw InputError("real study: chameleon needs edges_path, features_path and target_path");
    }
    return ingest_chameleon(cfg.data.edges_path, cfg.data.features_path, cfg.data.target_path,
                            cfg.data.top_features, opts);
  }
  throw InputError(fmt::format("real study: unknown dataset '{}'", cfg.data.dataset));
}

// ---- fitting -----------------------------------------------------------------

namespace {

/// sym_norm without self-loops; isolated nodes keep a unit self-loop so the
/// normalization stays defined.
PropagationOperator multiscale_operator(const SparseGraph& g) {
  const auto base = g.without_self_loops();
  std::vector<Edge> edges = base.edges();
  for (NodeId i = 0; i < base.size(); ++i)
    if (base.degree(i) == 0) edges.push_back({i, i});
  std::vector<Entry> entries;
  std::vector<double> inv_sqrt(base.size());
  for (NodeId i = 0; i < base.size(); ++i) {
    const auto d = base.degree(i);
    inv_sqrt[i] = d == 0 ? 1.0 : 1.0 / std::sqrt(static_cast<double>(d));
  }
  for (const auto& e : edges) {
    const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
    entries.push_back({e.u, e.v, w});
    if (e.u != e.v) entries.push_back({e.v, e.u, w});
  }
  return PropagationOperator::from_entries(base.size(), std::move(entries), OperatorKind::sym_norm);
}

double mse_where(const Vector& pred, const Vector& y, const MaskVector& mask, bool observed) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.observed(i) != observed) continue;
    const double e = pred[static_cast<Eigen::Index>(i)] - y[static_cast<Eigen::Index>(i)];
    acc += e * e;
    ++count;
  }
  if (count == 0) throw InputError("no nodes to evaluate");
  return acc / static_cast<double>(count);
}

/// A fitted predictor: training-copy predictions and held-out-copy predictions.
struct Prediction {
  Vector train;
  Vector fresh;
};

struct MethodSettings {
  std::size_t depth = 2;  // L1, readout depth for mlp, hops for multiscale
};

Prediction fit_method(Method method, const ExperimentConfig& cfg, const Dataset& ds, const MaskVector& mask,
                      const MethodSettings& ms, std::uint64_t seed) {
  Dataset view = ds;
  view.mask = mask;
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  Rng rng(seed);
  MlpShape readout{cfg.model.hidden, cfg.model.f_trunc};
  switch (method) {
    case Method::gnn_skip:
    case Method::gnn_noskip: {
      GnnShape shape{ds.dim(), ms.depth, readout};
      auto init = init_gnn(shape, rng);
      if (method == Method::gnn_noskip) {
        std::fill(init.gcn.gamma.begin(), init.gcn.gamma.end(), 0.0);
        init.gcn.gamma.back() = 1.0;
        tc.train_gamma = false;
      }
      const auto fit = train_lse(init, view, tc);
      return {gnn_predict(fit.params, ds.op, ds.x), gnn_predict(fit.params, ds.op, ds.x_fresh)};
    }
    case Method::mlp: {
      if (ms.depth != cfg.model.hidden.size() && !cfg.model.hidden.empty()) {
        readout.hidden.assign(ms.depth, cfg.model.hidden.front());
      }
      const auto fit = train_lse(init_mlp(ds.dim(), readout, rng), view, tc);
      return {mlp_forward_rows(fit.params, ds.x), mlp_forward_rows(fit.params, ds.x_fresh)};
    }
    case Method::multiscale: {
      view.op = multiscale_operator(ds.graph);
      const auto fit = train_lse(init_multiscale(ds.dim(), ms.depth, readout, rng), view, tc);
      return {multiscale_forward(fit.params, view.op, ds.x), multiscale_forward(fit.params, view.op, ds.x_fresh)};
    }
    case Method::tikhonov: {
      Vector f = tikhonov_fit(ds.graph, ds.y, mask, cfg.model.tikhonov_lambda);
      return {f, f};
    }
    case Method::label_prop: {
      Vector f = label_propagation(ds.graph, ds.y, mask, cfg.model.label_prop_alpha, cfg.model.label_prop_iters);
      return {f, f};
    }
  }
  throw InputError("unknown method");
}

MethodSettings default_settings(Method method, const ExperimentConfig& cfg) {
  switch (method) {
    case Method::multiscale: return {cfg.model.multiscale_hops};
    case Method::mlp: return {cfg.model.hidden.size()};
    default: return {cfg.model.gcn_depth};
  }
}

bool has_depth(Method m) { return m != Method::tikhonov && m != Method::label_prop; }

/// Picks the depth with the smallest error on a calibration subset of the
/// observed nodes.
MethodSettings select_settings(Method method, const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed) {
  if (!has_depth(method) || cfg.data.depth_grid.size() < 2) {
    auto s = default_settings(method, cfg);
    if (has_depth(method) && !cfg.data.depth_grid.empty()) s.depth = cfg.data.depth_grid.front();
    return s;
  }
  Rng rng(derive_seed(seed, 0xca1ULL));
  std::bernoulli_distribution calib(cfg.data.calibration_fraction);
  MaskVector fit_mask = ds.mask, cal_mask = MaskVector::full(ds.size());
  std::fill(cal_mask.omega.begin(), cal_mask.omega.end(), 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.mask.observed(i) && calib(rng)) {
      fit_mask.omega[i] = 0;
      cal_mask.omega[i] = 1;
    }
  }
  if (fit_mask.count() == 0 || cal_mask.count() == 0) return default_settings(method, cfg);
  MethodSettings best = default_settings(method, cfg);
  double best_err = std::numeric_limits<double>::infinity();
  for (auto depth : cfg.data.depth_grid) {
    MethodSettings s{depth};
    try {
      const auto pred = fit_method(method, cfg, ds, fit_mask, s, derive_seed(seed, depth));
      const double err = mse_where(pred.train, ds.y, cal_mask, true);
      if (err < best_err) {
        best_err = err;
        best = s;
      }
    } catch (const std::exception&) {
      // a failing candidate is simply not selected
    }
  }
  return best;
}

std::string error_status(const std::exception& e) {
  std::string msg = e.what();
  for (auto& c : msg)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return "error: " + msg;
}

}  // namespace

std::vector<ResultRow> run_cell(const ExperimentConfig& cfg, const CellKey& key, const Dataset* real) {
  const std::uint64_t seed = cell_seed(cfg.master_seed, key);
  std::vector<ResultRow> rows;
  ResultRow proto;
  proto.study = key.study;
  proto.topology = std::string(key.study == Study::real ? std::string_view(cfg.data.dataset) : to_string(key.topology));
  proto.n = key.n;
  proto.pi = key.pi;
  proto.avg_degree = key.avg_degree;
  proto.op = key.op;
  proto.trial = key.trial;

  Dataset ds;
  try {
    if (key.study == Study::real) {
      if (real == nullptr) throw InputError("real study: no dataset supplied");
      ds = *real;
      ds.mask = sample_mask(ds.size(), key.pi, derive_seed(seed, 0x6d61736bULL));
      proto.op = ds.op.kind();
    } else {
      ds = cell_dataset(cfg, key);
    }
    proto.n = ds.size();
    proto.max_degree = ds.graph.max_degree();
    proto.laplacian_energy = ds.meta.value("laplacian_energy", 0.0);
    const auto part = dependency_partition(ds.op, cfg.model.gcn_depth);
    proto.m = part.m;
    proto.r = part.r;
    if (ds.mask.count() == 0) throw InputError("mask observed no node");
  } catch (const std::exception& e) {
    for (auto method : cfg.methods) {
      auto row = proto;
      row.method = method;
      row.train_mse = row.test_mse = std::nan("");
      row.status = error_status(e);
      rows.push_back(row);
    }
    return rows;
  }

  for (auto method : cfg.methods) {
    auto row = proto;
    row.method = method;
    const auto start = std::chrono::steady_clock::now();
    try {
      const std::uint64_t mseed = derive_seed(seed, 0x100 + static_cast<std::uint64_t>(method));
      const auto settings = key.study == Study::real ? select_settings(method, cfg, ds, mseed)
                                                     : default_settings(method, cfg);
      const auto pred = fit_method(method, cfg, ds, ds.mask, settings, mseed);
      row.train_mse = mse_where(pred.train, ds.y, ds.mask, true);
      row.test_mse = key.study == Study::real ? mse_where(pred.train, ds.y, ds.mask, false)
                                              : mean_squared_error(pred.fresh, ds.y_clean_fresh);
      if (!std::isfinite(row.train_mse) || !std::isfinite(row.test_mse)) {
        throw NumericError("non-finite error estimate");
      }
    } catch (const std::exception& e) {
      row.train_mse = row.test_mse = std::nan("");
      row.status = error_status(e);
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

// ---- runners -----------------------------------------------------------------

void ResultTable::sort_canonical() {
  auto key = [](const ResultRow& r) {
    return std::tie(r.study, r.topology, r.n, r.pi, r.avg_degree, r.op, r.method, r.trial);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) { return key(a) < key(b); });
}

namespace {

ResultTable run_cells(const ExperimentConfig& cfg, const Dataset* real) {
  const auto cells = enumerate_cells(cfg);
  std::vector<std::vector<ResultRow>> slots(cells.size());
  std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) slots[i] = run_cell(cfg, cells[i], real);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  ResultTable table;
  for (auto& s : slots)
    for (auto& r : s) table.rows.push_back(std::move(r));
  table.sort_canonical();
  return table;
}

}  // namespace

ResultTable run_convergence(const ExperimentConfig& cfg) {
  if (!synthetic_convergence(cfg.study)) throw InputError("run_convergence: study must be convergence or label_fraction");
  cfg.validate();
  return run_cells(cfg, nullptr);
}

ResultTable run_topology(const ExperimentConfig& cfg) {
  if (cfg.study != Study::topology && cfg.study != Study::degree) {
    throw InputError("run_topology: study must be topology or degree");
  }
  cfg.validate();
  return run_cells(cfg, nullptr);
}

ResultTable run_real(const ExperimentConfig& cfg) {
  if (cfg.study != Study::real) throw InputError("run_real: study must be real");
  cfg.validate();
  const auto ds = load_real_dataset(cfg);
  return run_cells(cfg, &ds);
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.study) {
    case Study::convergence:
    case Study::label_fraction: return run_convergence(cfg);
    case Study::topology:
    case Study::degree: return run_topology(cfg);
    case Study::real: return run_real(cfg);
  }
  throw InputError("unknown study");
}

// ---- statistics -----------------------------------------------------------------

SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InputError("fit_slope: xs and ys differ in length");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw InputError("fit_slope: inputs must be positive");
  }
  std::vector<double> lx(xs.size()), ly(ys.size());
  std::transform(xs.begin(), xs.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(ys.begin(), ys.end(), ly.begin(), [](double v) { return std::log(v); });
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (lx.size() < 2 || !(sxx > 0.0)) throw InputError("fit_slope: need at least two distinct x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n_points = lx.size();
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

RankCorrelation spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InputError("spearman: xs and ys differ in length");
  if (xs.size() < 3) throw InputError("spearman: need at least three points");
  const auto rx = average_ranks(xs), ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
    sxy += (rx[i] - mx) * (ry[i] - my);
  }
  RankCorrelation out;
  out.n_points = rx.size();
  if (!(sxx > 0.0) || !(syy > 0.0)) return out;  // a constant sample carries no rank information
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(out.rho) >= 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double dof = n - 2.0;
  const double t = out.rho * std::sqrt(dof / (1.0 - out.rho * out.rho));
  const boost::math::students_t dist(dof);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return out;
}

}  // namespace gnnlab
