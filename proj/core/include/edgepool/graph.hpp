#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgepool/matrix.hpp"

namespace edgepool {

using NodeId = std::uint32_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class GraphErrc {
  index_out_of_range,
  duplicate_edge,
  self_loop,
  dimension_mismatch,
  feature_width_mismatch,
  empty_batch,
};

class GraphError : public std::invalid_argument {
public:
  GraphError(GraphErrc code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  GraphErrc code() const noexcept { return code_; }

private:
  GraphErrc code_;
};

/// Directed sparse graph with dense per-node features and optional per-edge
/// features. Immutable once built. Edges are kept sorted by (src, dst); all
/// tie-breaking downstream keys off this canonical edge index.
class Graph {
public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t feature_width() const noexcept { return static_cast<std::size_t>(node_features_.cols()); }
  std::size_t edge_feature_width() const noexcept {
    return edge_features_ ? static_cast<std::size_t>(edge_features_->cols()) : 0;
  }
  bool has_edge_features() const noexcept { return edge_features_.has_value(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const Matrix& node_features() const noexcept { return node_features_; }
  const std::optional<Matrix>& edge_features() const noexcept { return edge_features_; }

  /// Canonical indices of edges whose destination is `node`, ordered by src.
  std::span<const std::size_t> in_edges(NodeId node) const;
  /// Edges leaving `node` occupy the contiguous canonical range [first, last).
  struct EdgeRange {
    std::size_t first = 0;
    std::size_t last = 0;
  };
  EdgeRange out_edges(NodeId node) const;
  std::size_t in_degree(NodeId node) const;

  /// Index of edge (src, dst), if present. O(log out_degree).
  std::optional<std::size_t> find_edge(NodeId src, NodeId dst) const;

  /// Same structure, different node features (row count must match).
  Graph with_node_features(Matrix features) const;

  bool operator==(const Graph& other) const;

private:
  friend Graph build_graph(std::size_t, std::vector<Edge>, Matrix, std::optional<Matrix>);
  friend Graph make_graph_unchecked(std::size_t, std::vector<Edge>, Matrix, std::optional<Matrix>);

  void index();

  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  Matrix node_features_;
  std::optional<Matrix> edge_features_;

  struct InIndex {
    std::once_flag built;
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> edges;
  };
  const InIndex& in_index() const;

  std::vector<std::size_t> out_offsets_;
  // Built on first use. Copies share it; they have the same edges.
  std::shared_ptr<InIndex> in_index_ = std::make_shared<InIndex>();
};

/// Validates and canonicalizes. Edges (and edge feature rows with them) are
/// sorted by (src, dst). Throws GraphError.
Graph build_graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix node_features,
                  std::optional<Matrix> edge_features = std::nullopt);

/// For internal producers that already emit sorted, duplicate-free,
/// loop-free edges. Checked only in debug builds.
Graph make_graph_unchecked(std::size_t num_nodes, std::vector<Edge> edges, Matrix node_features,
                           std::optional<Matrix> edge_features = std::nullopt);

/// Adds every missing reverse edge. Added edges copy the forward edge's features.
Graph symmetrize(const Graph& graph);

bool is_symmetric(const Graph& graph);

/// Sources of all edges ending at `node`, in canonical edge order.
std::vector<NodeId> in_neighbors(const Graph& graph, NodeId node);

/// Disjoint union of graphs plus the node -> graph assignment.
struct BatchedGraph {
  Graph graph;
  std::vector<std::uint32_t> graph_id;
  std::size_t num_graphs = 0;

  /// First node of graph k; node_offset[num_graphs] == total nodes.
  std::vector<std::size_t> node_offset;
};

BatchedGraph batch(std::span<const Graph> graphs);
BatchedGraph batch(std::span<const Graph* const> graphs);

/// Number of batches, and the size of the last one, for `count` items.
struct BatchLayout {
  std::size_t full_batches = 0;
  std::size_t remainder = 0;
};
BatchLayout batch_layout(std::size_t count, std::size_t batch_size);

/// Graphviz rendering. Reverse edge pairs are drawn once as an undirected
/// edge. When `cluster_of` is given, node fill colour follows the cluster.
struct DotOptions {
  std::string name = "G";
  std::optional<std::vector<NodeId>> cluster_of;
  bool label_nodes = true;
};
std::string to_dot(const Graph& graph, const DotOptions& options = {});

/// Deterministic, visually distinct fill colour for a cluster ordinal.
std::string cluster_color(std::size_t cluster);

} // namespace edgepool
