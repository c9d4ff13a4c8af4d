#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnnlab/datagen.hpp"
#include "gnnlab/dataset.hpp"
#include "gnnlab/propagation.hpp"
#include "gnnlab/train.hpp"

namespace gnnlab {

enum class Study { convergence, label_fraction, topology, degree, real };
enum class Method { gnn_skip, gnn_noskip, mlp, tikhonov, label_prop, multiscale };

std::string_view to_string(Study s);
Study study_from_string(std::string_view name);
std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

struct ModelConfig {
  std::size_t gcn_depth = 2;                  // L1
  std::vector<std::size_t> hidden = {16, 16};  // readout widths p_1..p_L2
  double f_trunc = 10.0;
  std::size_t multiscale_hops = 2;
  double tikhonov_lambda = 1.0;
  double label_prop_alpha = 0.9;
  std::size_t label_prop_iters = 1000;
};

struct DataConfig {
  // synthetic studies
  std::size_t dim = 1;
  std::size_t filter_order = 2;
  std::optional<TargetKind> target;      // brownian for convergence studies, random_dnn otherwise
  std::optional<OperatorKind> op_kind;   // neigh_avg for convergence studies, sym_norm otherwise
  double noise_sigma = 1.0;
  double brownian_scale = 1.0;
  std::size_t dnn_depth = 2;
  std::size_t dnn_width = 16;

  // real study
  std::string dataset = "california";  // california | chameleon
  std::string csv_path;
  std::string edges_path, features_path, target_path;
  std::size_t knn_k = 8;
  std::size_t top_features = 0;
  double calibration_fraction = 0.1;
  std::vector<std::size_t> depth_grid = {1, 2, 3};  // L1 candidates for selection
};

struct ExperimentConfig {
  Study study = Study::convergence;
  std::vector<std::size_t> n_grid = {200, 400, 800, 1600, 3200};
  std::vector<double> pi_grid = {0.95};
  std::vector<double> degree_grid = {2.0};
  std::vector<TopologyKind> topologies = {TopologyKind::ring};
  std::vector<OperatorKind> operators;  // degree study; empty means sym_norm, row_norm, raw_adj
  std::size_t trials = 20;
  std::vector<Method> methods = {Method::gnn_skip, Method::gnn_noskip, Method::mlp};
  DataConfig data;
  ModelConfig model;
  TrainConfig train{.epochs = 1000};
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir = "out";
  std::size_t workers = 0;  // 0 = hardware concurrency

  /// Throws InputError on empty grids, zero trials or out-of-range values.
  void validate() const;
};

/// Keys missing from `j` keep their defaults; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// One factor combination and trial. Fields that a study does not vary hold
/// the value used for every cell.
struct CellKey {
  Study study = Study::convergence;
  TopologyKind topology = TopologyKind::ring;
  std::size_t n = 0;
  double pi = 1.0;
  double avg_degree = 2.0;
  OperatorKind op = OperatorKind::neigh_avg;
  std::size_t trial = 0;
};

/// Pure function of (master_seed, factor tuple, trial).
std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& key);

struct ResultRow {
  Study study = Study::convergence;
  std::string topology;
  std::size_t n = 0;
  double pi = 1.0;
  double avg_degree = 0.0;
  std::size_t max_degree = 0;
  OperatorKind op = OperatorKind::neigh_avg;
  Method method = Method::gnn_skip;
  std::size_t trial = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::size_t m = 0;
  std::size_t r = 0;
  double laplacian_energy = 0.0;
  double wall_time = 0.0;
  std::string status = "ok";

  bool ok() const noexcept { return status == "ok"; }
};

struct ResultTable {
  std::vector<ResultRow> rows;

  /// Sorts by (study factors, method, trial).
  void sort_canonical();
};

std::vector<CellKey> enumerate_cells(const ExperimentConfig& cfg);

/// Every configured method on one cell. Failures become rows whose status
/// starts with "error:". `real` supplies the ingested corpus for the real study.
std::vector<ResultRow> run_cell(const ExperimentConfig& cfg, const CellKey& key, const Dataset* real = nullptr);

ResultTable run_convergence(const ExperimentConfig& cfg);  // convergence and label_fraction
ResultTable run_topology(const ExperimentConfig& cfg);     // topology and degree
ResultTable run_real(const ExperimentConfig& cfg);
ResultTable run_experiment(const ExperimentConfig& cfg);

/// Loads the corpus named by cfg.data.
Dataset load_real_dataset(const ExperimentConfig& cfg);

/// Synthetic dataset of one cell, exactly as run_cell builds it.
Dataset cell_dataset(const ExperimentConfig& cfg, const CellKey& key);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

/// Ordinary least squares of log y on log x.
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

struct RankCorrelation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, Student t approximation
  std::size_t n_points = 0;
};

/// Spearman correlation with average ranks for ties.
RankCorrelation spearman(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace gnnlab
