#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "edgepool/graph.hpp"
#include "edgepool/matrix.hpp"

namespace edgepool {

class PoolError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Linear edge scorer r(i->j) = w . [x_i, x_j, e_ij] + b.
/// The edge-feature block is present only when the graph carries edge features.
struct PoolParams {
  Vector weight;
  double bias = 0.0;

  static std::size_t weight_length(std::size_t feature_width, std::size_t edge_feature_width = 0) {
    return 2 * feature_width + edge_feature_width;
  }
};

/// Per directed edge, indexed canonically.
struct EdgeScores {
  std::vector<double> raw;
  /// 0.5 + softmax over the non-dropped incoming edges of the destination;
  /// exactly 0 for dropped edges.
  std::vector<double> normalized;
  std::vector<std::uint8_t> dropped;

  bool is_dropped(std::size_t e) const { return !dropped.empty() && dropped[e] != 0; }
};

/// How a contracted pair's features combine before gating.
enum class MergeCombiner {
  sum,
  /// s * (a x_i + b x_j + c e_ij + d e_ji); needs edge features as wide as
  /// node features. e_ji is zero when the reverse edge is absent.
  weighted_linear,
};

struct LinearMergeWeights {
  double source = 1.0;
  double target = 1.0;
  double forward_edge = 1.0;
  double reverse_edge = 1.0;
};

struct PoolOptions {
  bool training = false;
  /// Edge-score dropout probability, applied only when training.
  double dropout_p = 0.0;
  std::uint64_t seed = 0;
  MergeCombiner combiner = MergeCombiner::sum;
  LinearMergeWeights merge_weights{};
};

/// One coarsening level.
struct PoolInfo {
  /// Contracted directed edges, in selection order.
  std::vector<Edge> matching;
  /// Canonical input edge index of each matching entry.
  std::vector<std::size_t> matched_edges;
  /// Original node -> pooled node.
  std::vector<NodeId> cluster_of;
  /// Gating score per original node; 1.0 for nodes that were not merged.
  std::vector<double> node_score;
  std::size_t pooled_num_nodes = 0;

  std::size_t input_num_nodes() const noexcept { return cluster_of.size(); }
};

struct PoolResult {
  Graph pooled;
  PoolInfo info;
  EdgeScores scores;
};

std::vector<double> raw_scores(const Graph& graph, const Matrix& features, const PoolParams& params);
std::vector<double> raw_scores(const Graph& graph, const PoolParams& params);

/// Softmax over each destination's non-dropped incoming edges, shifted by 0.5.
/// `dropped` may be empty (nothing dropped).
std::vector<double> normalize_scores(const Graph& graph, std::span<const double> raw,
                                     std::span<const std::uint8_t> dropped = {});

/// Draws an independent Bernoulli(p) drop mark per edge from `seed` and zeroes
/// the normalized score of dropped edges. Does not renormalize.
EdgeScores apply_score_dropout(EdgeScores scores, double p, std::uint64_t seed);

/// Greedy maximal matching: non-dropped edges in order of normalized score
/// (descending), ties by canonical index; an edge is taken iff both endpoints
/// are still free. Returns canonical edge indices in selection order.
std::vector<std::size_t> select_contractions(const Graph& graph, const EdgeScores& scores);

/// Merges each matched pair (i, j) into one node with features s_ij * (x_i + x_j)
/// (or the weighted combiner). Pooled nodes: merged pairs in matching order,
/// then unmatched nodes in original order. Self-loops vanish and parallel
/// edges collapse; their edge features are summed.
PoolResult contract(const Graph& graph, const Matrix& features, std::span<const std::size_t> matched_edges,
                    EdgeScores scores, const PoolOptions& options = {});
PoolResult contract(const Graph& graph, std::span<const std::size_t> matched_edges, EdgeScores scores,
                    const PoolOptions& options = {});

/// raw_scores -> dropout (training only) -> normalize -> select -> contract.
PoolResult edgepool_forward(const Graph& graph, const Matrix& features, const PoolParams& params,
                            const PoolOptions& options = {});
PoolResult edgepool_forward(const Graph& graph, const PoolParams& params, const PoolOptions& options = {});

struct PoolGradients {
  Matrix node_features;
  Vector weight;
  double bias = 0.0;
};

/// Reverse-mode derivative of the pooled node features with the matching held
/// fixed. `upstream` is dLoss/d(pooled features). `score_upstream`, when
/// non-empty, adds dLoss/d(gating score) per matching entry from consumers
/// that read the score directly (unpooling).
PoolGradients edgepool_backward(const Graph& graph, const Matrix& features, const PoolParams& params,
                                const PoolInfo& info, const EdgeScores& scores, const Matrix& upstream,
                                const PoolOptions& options = {}, std::span<const double> score_upstream = {});

/// Node -> pooled node map for a chain of levels (composition of cluster_of).
std::vector<NodeId> compose_clusters(std::span<const PoolInfo> levels);

/// Maps a per-node graph assignment through one pooling level.
std::vector<std::uint32_t> pool_graph_ids(std::span<const std::uint32_t> graph_id, const PoolInfo& info);

} // namespace edgepool
