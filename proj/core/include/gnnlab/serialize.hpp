#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "gnnlab/dataset.hpp"
#include "gnnlab/model.hpp"
#include "gnnlab/train.hpp"

namespace gnnlab {

inline constexpr int kCheckpointVersion = 1;

// Checkpoints are JSON objects:
//   {"format": "gnnlab-checkpoint", "version": 1, "model": "gnn" | "mlp" | "multiscale", ...}
// Matrices are {"rows": r, "cols": c, "data": [row-major values]}.
nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_json(const GnnParams& p);
nlohmann::json checkpoint_json(const MlpParams& p);
nlohmann::json checkpoint_json(const MultiscaleParams& p);

GnnParams gnn_from_checkpoint(const nlohmann::json& j);
MlpParams mlp_from_checkpoint(const nlohmann::json& j);
MultiscaleParams multiscale_from_checkpoint(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

/// Writes edges.txt, features.csv, features_fresh.csv, targets.csv
/// (node,y,y_clean,observed), targets_fresh.csv (node,y_clean) and meta.json.
void write_bundle(const Dataset& ds, const std::filesystem::path& dir);
/// Inverse of write_bundle; rebuilds the operator from meta["operator"] and
/// meta["self_loops"].
Dataset read_bundle(const std::filesystem::path& dir);

}  // namespace gnnlab
