#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "edgepool/params.hpp"

namespace edgepool {

inline constexpr int kCheckpointFormatVersion = 1;

/// {format_version, config, params: {name: {shape: [r, c], data: [...]}}}.
/// Only parameter values are stored; optimizer moments are not.
nlohmann::json checkpoint_to_json(const ParamStore& params, const nlohmann::json& config);

/// Copies stored values into `params`. Every parameter of `params` must be
/// present with a matching shape. Returns the stored config.
nlohmann::json load_checkpoint_json(const nlohmann::json& j, ParamStore& params);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const nlohmann::json& config);
nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamStore& params);

} // namespace edgepool
