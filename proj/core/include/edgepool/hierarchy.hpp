#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgepool/edgepool.hpp"

namespace edgepool {

/// One level of a pooling hierarchy: the map from the previous graph plus the
/// pooled graph it produced.
struct PoolLevel {
  PoolInfo info;
  Graph pooled;
};

/// [{cluster_of, matching, node_score, graph}, ...]; `graph` uses the
/// graph JSON format.
nlohmann::json hierarchy_to_json(std::span<const PoolLevel> levels);
std::vector<PoolLevel> hierarchy_from_json(const nlohmann::json& j);

void write_hierarchy(const std::filesystem::path& path, std::span<const PoolLevel> levels);
std::vector<PoolLevel> read_hierarchy(const std::filesystem::path& path);

/// Pools `graph` `levels` times with one parameter set per level.
std::vector<PoolLevel> pool_hierarchy(const Graph& graph, std::span<const PoolParams> params,
                                      const PoolOptions& options = {});

} // namespace edgepool
