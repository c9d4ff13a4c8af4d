#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gnnlab/experiment.hpp"

namespace gnnlab {

inline constexpr const char* kResultsHeader =
    "study,topology,n,pi,avg_degree,max_degree,operator,method,trial,train_mse,test_mse,m,r,laplacian_energy,"
    "wall_time_s,status";

inline constexpr const char* kSummaryHeader =
    "kind,study,topology,n,pi,avg_degree,operator,method,count,mean_max_degree,mean_train_mse,mean_test_mse,"
    "slope,intercept,r_squared,n_points,rho,p_value";

/// One results.csv line without the trailing newline. Error rows leave the
/// MSE fields empty.
std::string format_result_row(const ResultRow& row);
std::string format_results_csv(const ResultTable& table);

/// Per-cell means over trials (kind "mean"), log-log slope fits across the n
/// grid or across 1/pi (kind "slope"), and max-degree rank correlations for
/// the degree study (kind "spearman"). Only rows with status "ok" count.
std::string format_summary_csv(const ResultTable& table);

/// (file name, SVG document) per study panel.
std::vector<std::pair<std::string, std::string>> render_svgs(const ResultTable& table);

/// Writes results.csv, summary.csv and the SVG panels into out_dir, creating
/// it if needed. Returns the written paths.
std::vector<std::filesystem::path> emit_outputs(const ResultTable& table, const std::filesystem::path& out_dir);

}  // namespace gnnlab
