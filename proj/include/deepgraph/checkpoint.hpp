#pragma once

#include <string>

#include <json.hpp>

#include "deepgraph/model.hpp"

namespace deepgraph {

nlohmann::json config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

/// {"format": "deepgraph-checkpoint", "version": 1, "config": {...},
///  "tensors": {"<path>": {"shape": [rows, cols], "data": [row-major float64...]}}}
nlohmann::json checkpoint_to_json(const ModelParams& p);
ModelParams checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const ModelParams& p);
ModelParams load_checkpoint(const std::string& path);

}  // namespace deepgraph
