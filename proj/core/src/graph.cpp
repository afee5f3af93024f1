#include "edgepool/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

namespace edgepool {

namespace {

std::string edge_str(const Edge& e) {
  return "(" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")";
}

} // namespace

void Graph::index() {
  out_offsets_.assign(num_nodes_ + 1, 0);
  for (const Edge& e : edges_) ++out_offsets_[e.src + 1];
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  in_index_ = std::make_shared<InIndex>();
}

const Graph::InIndex& Graph::in_index() const {
  std::call_once(in_index_->built, [this] {
    InIndex& idx = *in_index_;
    idx.offsets.assign(num_nodes_ + 1, 0);
    for (const Edge& e : edges_) ++idx.offsets[e.dst + 1];
    std::partial_sum(idx.offsets.begin(), idx.offsets.end(), idx.offsets.begin());
    // Stable counting sort by dst keeps canonical (src-ascending) order per node.
    idx.edges.resize(edges_.size());
    std::vector<std::size_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) idx.edges[cursor[edges_[e].dst]++] = e;
  });
  return *in_index_;
}

std::span<const std::size_t> Graph::in_edges(NodeId node) const {
  if (node >= num_nodes_) {
    throw GraphError(GraphErrc::index_out_of_range, "node " + std::to_string(node) + " out of range");
  }
  const InIndex& idx = in_index();
  return std::span<const std::size_t>(idx.edges).subspan(idx.offsets[node], idx.offsets[node + 1] - idx.offsets[node]);
}

Graph::EdgeRange Graph::out_edges(NodeId node) const {
  if (node >= num_nodes_) {
    throw GraphError(GraphErrc::index_out_of_range, "node " + std::to_string(node) + " out of range");
  }
  return {out_offsets_[node], out_offsets_[node + 1]};
}

std::size_t Graph::in_degree(NodeId node) const {
  if (node >= num_nodes_) {
    throw GraphError(GraphErrc::index_out_of_range, "node " + std::to_string(node) + " out of range");
  }
  const InIndex& idx = in_index();
  return idx.offsets[node + 1] - idx.offsets[node];
}

std::optional<std::size_t> Graph::find_edge(NodeId src, NodeId dst) const {
  if (src >= num_nodes_) return std::nullopt;
  auto first = edges_.begin() + static_cast<std::ptrdiff_t>(out_offsets_[src]);
  auto last = edges_.begin() + static_cast<std::ptrdiff_t>(out_offsets_[src + 1]);
  auto it = std::lower_bound(first, last, Edge{src, dst});
  if (it == last || it->dst != dst) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

Graph Graph::with_node_features(Matrix features) const {
  if (static_cast<std::size_t>(features.rows()) != num_nodes_) {
    throw GraphError(GraphErrc::dimension_mismatch, "feature rows do not match node count");
  }
  Graph g = *this;
  g.node_features_ = std::move(features);
  return g;
}

bool Graph::operator==(const Graph& other) const {
  if (num_nodes_ != other.num_nodes_ || edges_ != other.edges_) return false;
  if (node_features_.rows() != other.node_features_.rows() ||
      node_features_.cols() != other.node_features_.cols() || node_features_ != other.node_features_) {
    return false;
  }
  if (edge_features_.has_value() != other.edge_features_.has_value()) return false;
  if (edge_features_) {
    const Matrix& a = *edge_features_;
    const Matrix& b = *other.edge_features_;
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

Graph build_graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix node_features,
                  std::optional<Matrix> edge_features) {
  if (static_cast<std::size_t>(node_features.rows()) != num_nodes) {
    throw GraphError(GraphErrc::dimension_mismatch,
                     "node_features has " + std::to_string(node_features.rows()) + " rows, expected " +
                         std::to_string(num_nodes));
  }
  if (edge_features && static_cast<std::size_t>(edge_features->rows()) != edges.size()) {
    throw GraphError(GraphErrc::dimension_mismatch,
                     "edge_features has " + std::to_string(edge_features->rows()) + " rows, expected " +
                         std::to_string(edges.size()));
  }
  for (const Edge& e : edges) {
    if (e.src >= num_nodes || e.dst >= num_nodes) {
      throw GraphError(GraphErrc::index_out_of_range, "edge " + edge_str(e) + " references a node >= " +
                                                          std::to_string(num_nodes));
    }
    if (e.src == e.dst) {
      throw GraphError(GraphErrc::self_loop, "self-loop at node " + std::to_string(e.src));
    }
  }

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (edges[order[k]] == edges[order[k - 1]]) {
      throw GraphError(GraphErrc::duplicate_edge, "duplicate edge " + edge_str(edges[order[k]]));
    }
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.edges_.resize(edges.size());
  for (std::size_t k = 0; k < order.size(); ++k) g.edges_[k] = edges[order[k]];
  g.node_features_ = std::move(node_features);
  if (edge_features) {
    Matrix sorted(edge_features->rows(), edge_features->cols());
    for (std::size_t k = 0; k < order.size(); ++k) {
      sorted.row(static_cast<Eigen::Index>(k)) = edge_features->row(static_cast<Eigen::Index>(order[k]));
    }
    g.edge_features_ = std::move(sorted);
  }
  g.index();
  return g;
}

Graph make_graph_unchecked(std::size_t num_nodes, std::vector<Edge> edges, Matrix node_features,
                           std::optional<Matrix> edge_features) {
#ifndef NDEBUG
  assert(static_cast<std::size_t>(node_features.rows()) == num_nodes);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    assert(edges[k].src < num_nodes && edges[k].dst < num_nodes && edges[k].src != edges[k].dst);
    assert(k == 0 || edges[k - 1] < edges[k]);
  }
#endif
  Graph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = std::move(edges);
  g.node_features_ = std::move(node_features);
  g.edge_features_ = std::move(edge_features);
  g.index();
  return g;
}

Graph symmetrize(const Graph& graph) {
  std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
  std::vector<std::size_t> source_row(edges.size());
  std::iota(source_row.begin(), source_row.end(), std::size_t{0});
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& fwd = graph.edge(e);
    if (!graph.find_edge(fwd.dst, fwd.src)) {
      edges.push_back({fwd.dst, fwd.src});
      source_row.push_back(e);
    }
  }
  if (edges.size() == graph.num_edges()) return graph;

  std::optional<Matrix> edge_features;
  if (graph.has_edge_features()) {
    const Matrix& src = *graph.edge_features();
    Matrix out(static_cast<Eigen::Index>(edges.size()), src.cols());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      out.row(static_cast<Eigen::Index>(k)) = src.row(static_cast<Eigen::Index>(source_row[k]));
    }
    edge_features = std::move(out);
  }
  return build_graph(graph.num_nodes(), std::move(edges), graph.node_features(), std::move(edge_features));
}

bool is_symmetric(const Graph& graph) {
  for (const Edge& e : graph.edges()) {
    if (!graph.find_edge(e.dst, e.src)) return false;
  }
  return true;
}

std::vector<NodeId> in_neighbors(const Graph& graph, NodeId node) {
  std::vector<NodeId> out;
  for (std::size_t e : graph.in_edges(node)) out.push_back(graph.edge(e).src);
  return out;
}

BatchedGraph batch(std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw GraphError(GraphErrc::empty_batch, "cannot batch an empty list of graphs");

  const std::size_t f = graphs.front()->feature_width();
  const bool with_edge_features = graphs.front()->has_edge_features();
  const std::size_t g = graphs.front()->edge_feature_width();

  BatchedGraph out;
  out.num_graphs = graphs.size();
  out.node_offset.reserve(graphs.size() + 1);
  out.node_offset.push_back(0);
  std::size_t total_edges = 0;
  for (const Graph* graph : graphs) {
    if (graph->feature_width() != f) {
      throw GraphError(GraphErrc::feature_width_mismatch, "graphs in a batch must share node feature width");
    }
    if (graph->has_edge_features() != with_edge_features || graph->edge_feature_width() != g) {
      throw GraphError(GraphErrc::feature_width_mismatch, "graphs in a batch must share edge feature width");
    }
    out.node_offset.push_back(out.node_offset.back() + graph->num_nodes());
    total_edges += graph->num_edges();
  }
  const std::size_t total_nodes = out.node_offset.back();

  Matrix features(static_cast<Eigen::Index>(total_nodes), static_cast<Eigen::Index>(f));
  std::optional<Matrix> edge_features;
  if (with_edge_features) edge_features = Matrix(static_cast<Eigen::Index>(total_edges), static_cast<Eigen::Index>(g));
  std::vector<Edge> edges;
  edges.reserve(total_edges);
  out.graph_id.resize(total_nodes);

  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& graph = *graphs[k];
    const auto offset = static_cast<NodeId>(out.node_offset[k]);
    const auto rows = static_cast<Eigen::Index>(graph.num_nodes());
    if (rows > 0) features.middleRows(offset, rows) = graph.node_features();
    if (with_edge_features && graph.num_edges() > 0) {
      edge_features->middleRows(static_cast<Eigen::Index>(edges.size()),
                                static_cast<Eigen::Index>(graph.num_edges())) = *graph.edge_features();
    }
    for (const Edge& e : graph.edges()) edges.push_back({e.src + offset, e.dst + offset});
    std::fill(out.graph_id.begin() + static_cast<std::ptrdiff_t>(offset),
              out.graph_id.begin() + static_cast<std::ptrdiff_t>(offset + graph.num_nodes()),
              static_cast<std::uint32_t>(k));
  }
  // Offsetting sorted per-graph edge lists keeps the union sorted.
  out.graph = make_graph_unchecked(total_nodes, std::move(edges), std::move(features), std::move(edge_features));
  return out;
}

BatchedGraph batch(std::span<const Graph> graphs) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return batch(std::span<const Graph* const>(ptrs));
}

BatchLayout batch_layout(std::size_t count, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  return {count / batch_size, count % batch_size};
}

std::string cluster_color(std::size_t cluster) {
  // Golden-ratio hue walk; HSV string understood by graphviz.
  const double hue = std::fmod(0.13 + 0.6180339887498949 * static_cast<double>(cluster), 1.0);
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << hue << " 0.45 0.95";
  return os.str();
}

std::string to_dot(const Graph& graph, const DotOptions& options) {
  if (options.cluster_of && options.cluster_of->size() != graph.num_nodes()) {
    throw GraphError(GraphErrc::dimension_mismatch, "cluster_of size does not match node count");
  }
  std::ostringstream os;
  os << "digraph " << options.name << " {\n";
  os << "  node [shape=circle, style=filled, fillcolor=\"white\"];\n";
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    os << "  " << v << " [";
    if (options.label_nodes) {
      os << "label=\"" << v << "\"";
    } else {
      os << "label=\"\"";
    }
    if (options.cluster_of) {
      os << ", fillcolor=\"" << cluster_color((*options.cluster_of)[v]) << "\"";
    }
    os << "];\n";
  }
  for (const Edge& e : graph.edges()) {
    const bool has_reverse = graph.find_edge(e.dst, e.src).has_value();
    if (has_reverse) {
      if (e.src < e.dst) os << "  " << e.src << " -> " << e.dst << " [dir=none];\n";
    } else {
      os << "  " << e.src << " -> " << e.dst << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

} // namespace edgepool
