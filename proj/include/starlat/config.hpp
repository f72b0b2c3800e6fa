#pragma once

#include "starlat/homogenization.hpp"
#include "starlat/optimize.hpp"

#include <json.hpp>

#include <string>

namespace starlat {

inline constexpr const char* kOutDirEnv = "STARLAT_OUT_DIR";

struct RunConfig {
    HomogenizationSettings settings;
    ParamBounds bounds = default_bounds();
    OptConfig optimizer;
    std::string output_dir = ".";
};

// Defaults, with the output directory taken from STARLAT_OUT_DIR when set.
RunConfig default_run_config();

nlohmann::json config_to_json(const RunConfig& c);
// Overrides only the keys present; unknown keys are rejected.
void apply_config(RunConfig& c, const nlohmann::json& j);
void load_config_file(RunConfig& c, const std::string& path);

}  // namespace starlat
