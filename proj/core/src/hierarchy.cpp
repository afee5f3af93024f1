#include "edgepool/hierarchy.hpp"

#include <fstream>

#include "edgepool/graph_io.hpp"

namespace edgepool {

using nlohmann::json;

json hierarchy_to_json(std::span<const PoolLevel> levels) {
  json out = json::array();
  for (const PoolLevel& level : levels) {
    json matching = json::array();
    for (const Edge& e : level.info.matching) matching.push_back({e.src, e.dst});
    out.push_back({{"cluster_of", level.info.cluster_of},
                   {"matching", std::move(matching)},
                   {"node_score", level.info.node_score},
                   {"graph", graph_to_json(level.pooled)}});
  }
  return out;
}

std::vector<PoolLevel> hierarchy_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("pooling hierarchy must be a JSON array");
  std::vector<PoolLevel> levels;
  for (const json& item : j) {
    for (const char* key : {"cluster_of", "matching", "node_score", "graph"}) {
      if (!item.contains(key)) throw FormatError(std::string("hierarchy level missing key '") + key + "'");
    }
    PoolLevel level;
    level.pooled = graph_from_json(item["graph"]).graph;
    level.info.cluster_of = item["cluster_of"].get<std::vector<NodeId>>();
    level.info.node_score = item["node_score"].get<std::vector<double>>();
    for (const json& pair : item["matching"]) {
      level.info.matching.push_back({pair.at(0).get<NodeId>(), pair.at(1).get<NodeId>()});
    }
    level.info.pooled_num_nodes = level.pooled.num_nodes();
    if (level.info.node_score.size() != level.info.cluster_of.size()) {
      throw FormatError("node_score and cluster_of lengths differ");
    }
    for (NodeId c : level.info.cluster_of) {
      if (c >= level.info.pooled_num_nodes) throw FormatError("cluster_of entry outside the pooled graph");
    }
    levels.push_back(std::move(level));
  }
  return levels;
}

void write_hierarchy(const std::filesystem::path& path, std::span<const PoolLevel> levels) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << hierarchy_to_json(levels).dump(1) << '\n';
}

std::vector<PoolLevel> read_hierarchy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return hierarchy_from_json(j);
}

std::vector<PoolLevel> pool_hierarchy(const Graph& graph, std::span<const PoolParams> params,
                                      const PoolOptions& options) {
  std::vector<PoolLevel> levels;
  levels.reserve(params.size());
  const Graph* current = &graph;
  for (const PoolParams& p : params) {
    PoolResult r = edgepool_forward(*current, p, options);
    levels.push_back({std::move(r.info), std::move(r.pooled)});
    current = &levels.back().pooled;
  }
  return levels;
}

} // namespace edgepool
