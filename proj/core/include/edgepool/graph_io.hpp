#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgepool/graph.hpp"

namespace edgepool {

/// A graph plus the optional labels carried by the JSON interchange format.
struct LabeledGraph {
  Graph graph;
  std::optional<int> label;
  std::optional<std::vector<int>> node_labels;
};

/// Raised for malformed or unreadable input files.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

nlohmann::json graph_to_json(const Graph& graph);
nlohmann::json graph_to_json(const LabeledGraph& graph);

/// Parses {num_nodes, edges, node_features, edge_features?, label?, node_labels?}.
/// Structural problems surface as GraphError, shape/type problems as FormatError.
LabeledGraph graph_from_json(const nlohmann::json& j);

LabeledGraph read_graph_json(const std::filesystem::path& path);
void write_graph_json(const std::filesystem::path& path, const LabeledGraph& graph);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, std::size_t expected_rows);

} // namespace edgepool
