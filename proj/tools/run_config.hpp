#pragma once

// Hierarchical run configuration: built-in defaults, an optional JSON file and
// key.path=value overrides. Every key must exist in the defaults.

#include <string>
#include <vector>

#include "json.hpp"

#include "icann/refmodels.hpp"
#include "icann/training.hpp"

namespace icann::cli {

using nlohmann::json;

json default_config();

/// Merges `overlay` into `base`. Unknown keys and type mismatches raise ConfigError.
void merge_config(json& base, const json& overlay, const std::string& where = "");

/// Applies "a.b.c=value". Values are read as JSON when they parse, otherwise as
/// strings; comma-separated text fills string arrays.
void apply_override(json& cfg, const std::string& assignment);

json load_config_file(const std::string& path);

StepOptions step_options(const json& cfg);
VmAfParams vm_af_params(const json& cfg);
TschoeglParams tschoegl_params(const json& cfg);
PathSpec path_spec(const json& cfg, PathKind kind);
TrainConfig train_config(const json& cfg);

}  // namespace icann::cli
