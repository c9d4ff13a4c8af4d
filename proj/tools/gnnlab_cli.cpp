// gnnlab command-line front end.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include "CLI11.hpp"
#endif
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gnnlab/datagen.hpp"
#include "gnnlab/errors.hpp"
#include "gnnlab/experiment.hpp"
#include "gnnlab/model.hpp"
#include "gnnlab/report.hpp"
#include "gnnlab/serialize.hpp"
#include "gnnlab/theory.hpp"
#include "gnnlab/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gnnlab;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* app, CommonFlags& f, bool config_required) {
  auto* c = app->add_option("--config", f.config, "JSON configuration file");
  if (config_required) c->required();
  c->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "master seed (overrides the config)");
  app->add_option("--workers", f.workers, "concurrent trials (default: available cores)");
}

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json_file(path); }

// ---- gen -----------------------------------------------------------------

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec s;
  for (const auto& [key, v] : j.items()) {
    if (key == "topology") s.topology.kind = topology_kind_from_string(v.get<std::string>());
    else if (key == "n") s.topology.n = v.get<std::size_t>();
    else if (key == "avg_degree") s.topology.avg_degree = v.get<double>();
    else if (key == "dim") s.dim = v.get<std::size_t>();
    else if (key == "filter_order") s.filter_order = v.get<std::size_t>();
    else if (key == "target") s.target = target_kind_from_string(v.get<std::string>());
    else if (key == "operator") s.op_kind = operator_kind_from_string(v.get<std::string>());
    else if (key == "pi") s.pi = v.get<double>();
    else if (key == "noise_sigma") s.noise_sigma = v.get<double>();
    else if (key == "seed") s.seed = v.get<std::uint64_t>();
    else if (key == "self_loops") s.self_loops = v.get<bool>();
    else if (key == "brownian_scale") s.brownian_scale = v.get<double>();
    else if (key == "dnn_depth") s.dnn_depth = v.get<std::size_t>();
    else if (key == "dnn_width") s.dnn_width = v.get<std::size_t>();
    else if (key == "standardize_z") s.standardize_z = v.get<bool>();
    else if (key == "theta") s.theta = v.get<std::vector<double>>();
    else if (key == "target_seed") s.target_seed = v.get<std::uint64_t>();
    else if (key == "features") {
      FeatureDistribution fd;
      const auto kind = v.get<std::string>();
      if (kind == "uniform01") fd.kind = FeatureDistribution::Kind::uniform01;
      else if (kind == "gaussian") fd.kind = FeatureDistribution::Kind::gaussian;
      else throw InputError(fmt::format("unknown feature distribution '{}'", kind));
      s.features = fd;
    } else {
      throw FormatError(fmt::format("dataset config: unknown key '{}'", key));
    }
  }
  return s;
}

int cmd_gen(const CommonFlags& f) {
  auto spec = synthetic_spec_from_json(load_config(f.config));
  if (f.seed) spec.seed = *f.seed;
  const auto ds = make_synthetic(spec);
  const fs::path out = f.out.empty() ? fs::path("bundle") : fs::path(f.out);
  write_bundle(ds, out);
  fmt::print("wrote {} nodes, {} edges to {}\n", ds.size(), ds.graph.without_self_loops().num_edges(), out.string());
  return 0;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const CommonFlags& f, const std::string& bundle, const std::string& method_name) {
  const auto cfg_json = load_config(f.config);
  ModelConfig model;
  TrainConfig train;
  {
    // reuse the experiment parser for the model and train sections
    json exp = json::object();
    if (cfg_json.contains("model")) exp["model"] = cfg_json["model"];
    if (cfg_json.contains("train")) exp["train"] = cfg_json["train"];
    for (const auto& [key, v] : cfg_json.items()) {
      if (key != "model" && key != "train") throw FormatError(fmt::format("train config: unknown key '{}'", key));
    }
    const auto parsed = experiment_config_from_json(exp);
    model = parsed.model;
    train = parsed.train;
  }
  if (f.seed) train.seed = *f.seed;
  const auto ds = read_bundle(bundle);
  const auto method = method_from_string(method_name);
  Rng rng(train.seed);
  const MlpShape readout{model.hidden, model.f_trunc};
  const fs::path out = f.out.empty() ? fs::path("fit") : fs::path(f.out);
  fs::create_directories(out);

  json checkpoint;
  std::vector<double> trace;
  Vector pred_train, pred_fresh;
  double wall = 0.0;
  switch (method) {
    case Method::gnn_skip:
    case Method::gnn_noskip: {
      auto init = init_gnn({ds.dim(), model.gcn_depth, readout}, rng);
      auto tc = train;
      if (method == Method::gnn_noskip) {
        std::fill(init.gcn.gamma.begin(), init.gcn.gamma.end(), 0.0);
        init.gcn.gamma.back() = 1.0;
        tc.train_gamma = false;
      }
      const auto fit = train_lse(init, ds, tc);
      checkpoint = checkpoint_json(fit.params);
      trace = fit.loss_trace;
      wall = fit.wall_time;
      pred_train = gnn_predict(fit.params, ds.op, ds.x);
      pred_fresh = gnn_predict(fit.params, ds.op, ds.x_fresh);
      break;
    }
    case Method::mlp: {
      const auto fit = train_lse(init_mlp(ds.dim(), readout, rng), ds, train);
      checkpoint = checkpoint_json(fit.params);
      trace = fit.loss_trace;
      wall = fit.wall_time;
      pred_train = mlp_forward_rows(fit.params, ds.x);
      pred_fresh = mlp_forward_rows(fit.params, ds.x_fresh);
      break;
    }
    case Method::multiscale: {
      const auto fit = train_lse(init_multiscale(ds.dim(), model.multiscale_hops, readout, rng), ds, train);
      checkpoint = checkpoint_json(fit.params);
      trace = fit.loss_trace;
      wall = fit.wall_time;
      pred_train = multiscale_forward(fit.params, ds.op, ds.x);
      pred_fresh = multiscale_forward(fit.params, ds.op, ds.x_fresh);
      break;
    }
    default:
      throw InputError("train: only gnn_skip, gnn_noskip, mlp and multiscale produce checkpoints");
  }

  write_text_file(out / "checkpoint.json", checkpoint.dump(2) + "\n");
  std::string loss_csv = "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) loss_csv += fmt::format("{},{}\n", e + 1, trace[e]);
  write_text_file(out / "loss.csv", loss_csv);
  const double train_mse = masked_mse(pred_train, ds.y, ds.mask, LossNorm::over_omega);
  const double test_mse = mean_squared_error(pred_fresh, ds.y_clean_fresh);
  const json metrics = {{"method", method_name},  {"train_mse", train_mse}, {"test_mse", test_mse},
                        {"transductive", ds.transductive()}, {"wall_time_s", wall}};
  write_text_file(out / "metrics.json", metrics.dump(2) + "\n");
  fmt::print("train_mse {:.6g}  test_mse {:.6g}  ({:.2f}s)\n", train_mse, test_mse, wall);
  return 0;
}

// ---- experiments -------------------------------------------------------------

int cmd_experiment(const CommonFlags& f, Study default_study) {
  auto j = load_config(f.config);
  if (!j.contains("study")) j["study"] = std::string(to_string(default_study));
  auto cfg = experiment_config_from_json(j);
  const bool allowed = cfg.study == default_study ||
                       (default_study == Study::convergence && cfg.study == Study::label_fraction) ||
                       (default_study == Study::topology && cfg.study == Study::degree);
  if (!allowed) {
    throw InputError(fmt::format("config study '{}' does not belong to this subcommand", to_string(cfg.study)));
  }
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.out.empty()) cfg.out_dir = f.out;
  const auto table = run_experiment(cfg);
  const auto files = emit_outputs(table, cfg.out_dir);
  write_text_file(cfg.out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.ok() ? 0 : 1;
  fmt::print("{} rows ({} failed); wrote {} files to {}\n", table.rows.size(), failed, files.size() + 1,
             cfg.out_dir.string());
  return 0;
}

// ---- theory -----------------------------------------------------------------

struct TheoryFlags {
  std::string bundle;
  std::size_t depth = 2;
  std::string hidden = "16,16";
  double delta = 0.01;
  double alpha = 0.5;
  std::size_t intrinsic_dim = 1;
  std::string csv;
  std::size_t mismatch = 0;
  double tau_max = 1.0;
  std::size_t filter_order = 2;
};

std::vector<std::size_t> parse_widths(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stoul(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

int cmd_theory(const CommonFlags& f, const TheoryFlags& t) {
  Dataset ds;
  if (!t.bundle.empty()) {
    ds = read_bundle(t.bundle);
  } else {
    auto spec = synthetic_spec_from_json(load_config(f.config));
    if (f.seed) spec.seed = *f.seed;
    ds = make_synthetic(spec);
  }
  const auto hidden = parse_widths(t.hidden);
  std::vector<std::size_t> widths{ds.dim()};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  std::size_t s = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) s += widths[l + 1] * widths[l] + widths[l + 1];
  const double tn = row_sum_norm(ds.op);
  const auto part = dependency_partition(ds.op, t.depth);
  auto smooth = effective_smoothness({{ds.dim()}, {t.intrinsic_dim}, {t.alpha}, {}});

  std::vector<std::pair<std::string, std::string>> table = {
      {"n", fmt::format("{}", ds.size())},
      {"operator", std::string(to_string(ds.op.kind()))},
      {"max_degree", fmt::format("{}", ds.graph.max_degree())},
      {"row_sum_norm", fmt::format("{}", tn)},
      {"gcn_depth", fmt::format("{}", t.depth)},
      {"receptive_field_m", fmt::format("{}", part.m)},
      {"receptive_field_upper_bound", fmt::format("{}", receptive_field_upper_bound(ds.op, t.depth))},
      {"partition_r", fmt::format("{}", part.r)},
      {"partition_bound", fmt::format("{}", part.color_bound())},
      {"dependency_degree_max", fmt::format("{}", part.dep_degree_max)},
      {"readout_parameters_s", fmt::format("{}", s)},
      {"entropy_bound", fmt::format("{}", entropy_bound(t.delta, ds.dim(), t.depth, hidden.size(), widths, s, tn))},
      {"kappa_n", hidden.empty() || s < 2 ? "n/a"
                                         : fmt::format("{}", kappa_n(static_cast<double>(ds.size()), ds.dim(), t.depth,
                                                                     hidden.size(), s, tn))},
      {"rate_exponent", fmt::format("{}", predicted_rate_exponent(smooth))},
  };
  for (const auto& [k, v] : table) fmt::print("{:<30} {}\n", k, v);
  if (!t.csv.empty()) {
    std::string out = "quantity,value\n";
    for (const auto& [k, v] : table) out += fmt::format("{},{}\n", k, v);
    write_text_file(t.csv, out);
  }

  if (t.mismatch > 0) {
    const std::uint64_t seed = f.seed.value_or(0);
    std::string out = "instance,tau,lhs,rhs,margin,holds\n";
    std::size_t violations = 0;
    for (std::size_t i = 0; i < t.mismatch; ++i) {
      const std::uint64_t si = derive_seed(seed, i);
      const double tau = t.tau_max * static_cast<double>(i + 1) / static_cast<double>(t.mismatch);
      const auto perturbed = perturb_operator(ds.op, tau, si);
      const auto coeffs = FilterCoefficients::tight(draw_filter(t.filter_order, derive_seed(si, 1)));
      const auto check = verify_mismatch(perturbed, ds.op, coeffs, ds.x);
      violations += check.holds ? 0 : 1;
      out += fmt::format("{},{},{},{},{},{}\n", i, tau, check.lhs, check.rhs, check.rhs - check.lhs,
                         check.holds ? 1 : 0);
    }
    const fs::path path = f.out.empty() ? fs::path("mismatch.csv") : fs::path(f.out) / "mismatch.csv";
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_file(path, out);
    fmt::print("mismatch: {} instances, {} violations -> {}\n", t.mismatch, violations, path.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnnlab: graph neural network regression experiments"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, conv_f, topo_f, deg_f, real_f, theory_f;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset bundle");
  add_common(gen, gen_f, false);

  std::string bundle, method = "gnn_skip";
  auto* train = app.add_subcommand("train", "fit one model on a dataset bundle");
  add_common(train, train_f, false);
  train->add_option("--bundle", bundle, "dataset bundle directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--method", method, "gnn_skip, gnn_noskip, mlp or multiscale");

  auto* conv = app.add_subcommand("convergence", "MSE against n (or against 1/pi with study=label_fraction)");
  add_common(conv, conv_f, false);
  auto* topo = app.add_subcommand("topology", "MSE across graph families");
  add_common(topo, topo_f, false);
  auto* deg = app.add_subcommand("degree", "MSE against realized max degree on preferential-attachment graphs");
  add_common(deg, deg_f, false);
  auto* real = app.add_subcommand("real", "transductive benchmark on an ingested corpus");
  add_common(real, real_f, true);

  TheoryFlags tf;
  auto* theory = app.add_subcommand("theory", "receptive field, partition, bound formulas, mismatch checks");
  add_common(theory, theory_f, false);
  theory->add_option("--bundle", tf.bundle, "dataset bundle directory (else generate from --config)")
      ->check(CLI::ExistingDirectory);
  theory->add_option("--depth", tf.depth, "GCN depth L1");
  theory->add_option("--hidden", tf.hidden, "comma-separated readout widths");
  theory->add_option("--delta", tf.delta, "entropy scale");
  theory->add_option("--alpha", tf.alpha, "Holder exponent of the readout target");
  theory->add_option("--intrinsic-dim", tf.intrinsic_dim, "intrinsic input dimension t");
  theory->add_option("--csv", tf.csv, "also write the table as CSV");
  theory->add_option("--mismatch", tf.mismatch, "number of perturbed-operator instances to verify");
  theory->add_option("--tau-max", tf.tau_max, "largest perturbation magnitude");
  theory->add_option("--filter-order", tf.filter_order, "filter order k for mismatch checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen(gen_f);
    if (*train) return cmd_train(train_f, bundle, method);
    if (*conv) return cmd_experiment(conv_f, Study::convergence);
    if (*topo) return cmd_experiment(topo_f, Study::topology);
    if (*deg) return cmd_experiment(deg_f, Study::degree);
    if (*real) return cmd_experiment(real_f, Study::real);
    if (*theory) return cmd_theory(theory_f, tf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
