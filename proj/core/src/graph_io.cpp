#include "edgepool/graph_io.hpp"

#include <fstream>

namespace edgepool {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t expected_rows) {
  if (!j.is_array()) throw FormatError("expected an array of rows");
  if (j.size() != expected_rows) {
    throw GraphError(GraphErrc::dimension_mismatch, "expected " + std::to_string(expected_rows) + " rows, got " +
                                                        std::to_string(j.size()));
  }
  std::size_t width = 0;
  if (!j.empty()) {
    if (!j.front().is_array()) throw FormatError("feature rows must be arrays");
    width = j.front().size();
  }
  Matrix m(static_cast<Eigen::Index>(expected_rows), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < expected_rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != width) {
      throw GraphError(GraphErrc::dimension_mismatch, "ragged feature row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (!row[c].is_number()) throw FormatError("non-numeric feature at row " + std::to_string(r));
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

json graph_to_json(const Graph& graph) {
  json j;
  j["num_nodes"] = graph.num_nodes();
  json edges = json::array();
  for (const Edge& e : graph.edges()) edges.push_back({e.src, e.dst});
  j["edges"] = std::move(edges);
  j["node_features"] = matrix_to_json(graph.node_features());
  if (graph.has_edge_features()) j["edge_features"] = matrix_to_json(*graph.edge_features());
  return j;
}

json graph_to_json(const LabeledGraph& graph) {
  json j = graph_to_json(graph.graph);
  if (graph.label) j["label"] = *graph.label;
  if (graph.node_labels) j["node_labels"] = *graph.node_labels;
  return j;
}

LabeledGraph graph_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("graph JSON must be an object");
  for (const char* key : {"num_nodes", "edges", "node_features"}) {
    if (!j.contains(key)) throw FormatError(std::string("graph JSON missing key '") + key + "'");
  }
  if (!j["num_nodes"].is_number_integer() || j["num_nodes"].get<long long>() < 0) {
    throw FormatError("num_nodes must be a non-negative integer");
  }
  const auto num_nodes = j["num_nodes"].get<std::size_t>();

  std::vector<Edge> edges;
  if (!j["edges"].is_array()) throw FormatError("edges must be an array");
  edges.reserve(j["edges"].size());
  for (const json& pair : j["edges"]) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
      throw FormatError("each edge must be a [src, dst] integer pair");
    }
    const auto src = pair[0].get<long long>();
    const auto dst = pair[1].get<long long>();
    if (src < 0 || dst < 0 || src > 0xffffffffLL || dst > 0xffffffffLL) {
      throw GraphError(GraphErrc::index_out_of_range, "negative or oversized node index in edge list");
    }
    edges.push_back({static_cast<NodeId>(src), static_cast<NodeId>(dst)});
  }

  Matrix features = matrix_from_json(j["node_features"], num_nodes);
  std::optional<Matrix> edge_features;
  if (j.contains("edge_features") && !j["edge_features"].is_null()) {
    edge_features = matrix_from_json(j["edge_features"], edges.size());
  }

  LabeledGraph out{build_graph(num_nodes, std::move(edges), std::move(features), std::move(edge_features)),
                   std::nullopt, std::nullopt};
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number_integer()) throw FormatError("label must be an integer");
    out.label = j["label"].get<int>();
  }
  if (j.contains("node_labels") && !j["node_labels"].is_null()) {
    auto labels = j["node_labels"].get<std::vector<int>>();
    if (labels.size() != num_nodes) {
      throw GraphError(GraphErrc::dimension_mismatch, "node_labels length does not match num_nodes");
    }
    out.node_labels = std::move(labels);
  }
  return out;
}

LabeledGraph read_graph_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return graph_from_json(j);
}

void write_graph_json(const std::filesystem::path& path, const LabeledGraph& graph) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << graph_to_json(graph).dump() << '\n';
}

} // namespace edgepool
