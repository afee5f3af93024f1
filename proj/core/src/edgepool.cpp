#include "edgepool/edgepool.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "edgepool/rng.hpp"

namespace edgepool {

namespace {

constexpr NodeId kUnassigned = std::numeric_limits<NodeId>::max();

void check_params(const Graph& graph, const Matrix& features, const PoolParams& params) {
  if (static_cast<std::size_t>(features.rows()) != graph.num_nodes()) {
    throw PoolError("feature rows (" + std::to_string(features.rows()) + ") do not match node count (" +
                    std::to_string(graph.num_nodes()) + ")");
  }
  const std::size_t expected =
      PoolParams::weight_length(static_cast<std::size_t>(features.cols()), graph.edge_feature_width());
  if (static_cast<std::size_t>(params.weight.size()) != expected) {
    throw PoolError("score weight has length " + std::to_string(params.weight.size()) + ", expected " +
                    std::to_string(expected) + (graph.has_edge_features() ? " (with edge features)" : ""));
  }
}

void check_merge_options(const Graph& graph, const Matrix& features, const PoolOptions& options) {
  if (options.combiner == MergeCombiner::weighted_linear &&
      (!graph.has_edge_features() || graph.edge_feature_width() != static_cast<std::size_t>(features.cols()))) {
    throw PoolError("weighted_linear combiner needs edge features as wide as node features");
  }
}

// Orders doubles descending as unsigned integers ascending.
std::uint64_t descending_key(double score) {
  const auto bits = std::bit_cast<std::uint64_t>(score);
  const std::uint64_t ascending = (bits >> 63) != 0 ? ~bits : bits | (std::uint64_t{1} << 63);
  return ~ascending;
}

// Canonical edge order is (src, dst) order, so the endpoints double as the
// tie-break on edge index.
struct Candidate {
  std::uint64_t key;
  Edge endpoints;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  return a.key != b.key ? a.key < b.key : a.endpoints < b.endpoints;
}

// Candidates of non-dropped edges in selection order. Normalized scores of
// selectable edges lie in [0.5, 1.5], so one stable pass buckets them by
// quantized score (descending); each bucket is then sorted exactly. Edges
// arrive in canonical order, so tie-only buckets are already sorted.
std::vector<Candidate> ordered_candidates(const Graph& graph, const EdgeScores& scores) {
  const std::size_t m = graph.num_edges();
  const int bits = std::clamp(static_cast<int>(std::bit_width(m)) - 1, 1, 16);
  const std::size_t buckets = std::size_t{1} << bits;
  const auto bucket_of = [&](double s) -> std::size_t {
    const double pos = (1.5 - s) * static_cast<double>(buckets);
    if (!(pos > 0.0)) return 0;  // also NaN
    return std::min(buckets - 1, static_cast<std::size_t>(pos));
  };

  std::vector<std::size_t> offsets(buckets + 1, 0);
  for (std::size_t e = 0; e < m; ++e) {
    if (!scores.is_dropped(e)) ++offsets[bucket_of(scores.normalized[e]) + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<Candidate> out(offsets.back());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t e = 0; e < m; ++e) {
      if (scores.is_dropped(e)) continue;
      const double s = scores.normalized[e];
      out[cursor[bucket_of(s)]++] = {descending_key(s), graph.edge(e)};
    }
  }
  for (std::size_t b = 0; b < buckets; ++b) {
    auto first = out.begin() + static_cast<std::ptrdiff_t>(offsets[b]);
    auto last = out.begin() + static_cast<std::ptrdiff_t>(offsets[b + 1]);
    if (!std::is_sorted(first, last, candidate_less)) std::sort(first, last, candidate_less);
  }
  return out;
}

} // namespace

std::vector<double> raw_scores(const Graph& graph, const Matrix& features, const PoolParams& params) {
  check_params(graph, features, params);
  const Eigen::Index f = features.cols();
  const Eigen::Index g = static_cast<Eigen::Index>(graph.edge_feature_width());

  // Per-node halves of the dot product, then one add per edge.
  const Vector src_part = features * params.weight.head(f);
  const Vector dst_part = features * params.weight.segment(f, f);

  std::vector<double> raw(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    double r = src_part[edge.src] + dst_part[edge.dst] + params.bias;
    if (g > 0) r += graph.edge_features()->row(static_cast<Eigen::Index>(e)).dot(params.weight.tail(g));
    raw[e] = r;
  }
  return raw;
}

std::vector<double> raw_scores(const Graph& graph, const PoolParams& params) {
  return raw_scores(graph, graph.node_features(), params);
}

std::vector<double> normalize_scores(const Graph& graph, std::span<const double> raw,
                                     std::span<const std::uint8_t> dropped) {
  if (raw.size() != graph.num_edges() || (!dropped.empty() && dropped.size() != graph.num_edges())) {
    throw PoolError("score arrays do not match the edge count");
  }
  const auto is_dropped = [&](std::size_t e) { return !dropped.empty() && dropped[e] != 0; };

  // Three sequential sweeps in canonical edge order. Each destination's
  // denominator accumulates its in-edges in increasing index order.
  const std::size_t n = graph.num_nodes();
  const std::size_t m = graph.num_edges();
  std::vector<double> max_raw(n, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < m; ++e) {
    if (is_dropped(e)) continue;
    double& mx = max_raw[graph.edge(e).dst];
    mx = std::max(mx, raw[e]);
  }
  std::vector<double> normalized(m, 0.0);
  std::vector<double> denom(n, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    if (is_dropped(e)) continue;
    const NodeId j = graph.edge(e).dst;
    normalized[e] = std::exp(raw[e] - max_raw[j]);
    denom[j] += normalized[e];
  }
  for (std::size_t e = 0; e < m; ++e) {
    if (!is_dropped(e)) normalized[e] = 0.5 + normalized[e] / denom[graph.edge(e).dst];
  }
  return normalized;
}

EdgeScores apply_score_dropout(EdgeScores scores, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw PoolError("dropout probability must lie in [0, 1)");
  const std::size_t n = std::max(scores.raw.size(), scores.normalized.size());
  scores.dropped.assign(n, 0);
  if (p == 0.0) return scores;
  Rng rng = make_rng(seed, "edge-score-dropout");
  std::bernoulli_distribution drop(p);
  for (std::size_t e = 0; e < n; ++e) {
    if (drop(rng)) {
      scores.dropped[e] = 1;
      if (e < scores.normalized.size()) scores.normalized[e] = 0.0;
    }
  }
  return scores;
}

std::vector<std::size_t> select_contractions(const Graph& graph, const EdgeScores& scores) {
  if (scores.normalized.size() != graph.num_edges()) throw PoolError("normalized scores missing");

  const std::vector<Candidate> order = ordered_candidates(graph, scores);

  std::vector<std::uint8_t> taken(graph.num_nodes(), 0);
  std::vector<std::size_t> matched;
  for (const Candidate& c : order) {
    const Edge& edge = c.endpoints;
    if (taken[edge.src] || taken[edge.dst]) continue;
    taken[edge.src] = taken[edge.dst] = 1;
    matched.push_back(*graph.find_edge(edge.src, edge.dst));
  }
  return matched;
}

PoolResult contract(const Graph& graph, const Matrix& features, std::span<const std::size_t> matched_edges,
                    EdgeScores scores, const PoolOptions& options) {
  const std::size_t n = graph.num_nodes();
  if (static_cast<std::size_t>(features.rows()) != n) throw PoolError("feature rows do not match node count");
  if (scores.normalized.size() != graph.num_edges()) throw PoolError("normalized scores missing");
  check_merge_options(graph, features, options);

  PoolInfo info;
  info.cluster_of.assign(n, kUnassigned);
  info.node_score.assign(n, 1.0);
  info.matching.reserve(matched_edges.size());
  info.matched_edges.assign(matched_edges.begin(), matched_edges.end());

  NodeId next = 0;
  for (std::size_t e : matched_edges) {
    if (e >= graph.num_edges()) throw PoolError("matched edge index out of range");
    const Edge& edge = graph.edge(e);
    if (info.cluster_of[edge.src] != kUnassigned || info.cluster_of[edge.dst] != kUnassigned) {
      throw PoolError("invalid matching: node shared by two contracted edges");
    }
    info.cluster_of[edge.src] = info.cluster_of[edge.dst] = next++;
    info.node_score[edge.src] = info.node_score[edge.dst] = scores.normalized[e];
    info.matching.push_back(edge);
  }
  for (NodeId v = 0; v < n; ++v) {
    if (info.cluster_of[v] == kUnassigned) info.cluster_of[v] = next++;
  }
  info.pooled_num_nodes = next;

  // Node features.
  const Eigen::Index f = features.cols();
  Matrix pooled_features(static_cast<Eigen::Index>(info.pooled_num_nodes), f);
  for (std::size_t k = 0; k < matched_edges.size(); ++k) {
    const std::size_t e = matched_edges[k];
    const Edge& edge = info.matching[k];
    const double s = scores.normalized[e];
    auto out = pooled_features.row(static_cast<Eigen::Index>(k));
    if (options.combiner == MergeCombiner::sum) {
      out = s * (features.row(edge.src) + features.row(edge.dst));
    } else {
      const LinearMergeWeights& w = options.merge_weights;
      const Matrix& ef = *graph.edge_features();
      RowVector combined = w.source * features.row(edge.src) + w.target * features.row(edge.dst) +
                           w.forward_edge * ef.row(static_cast<Eigen::Index>(e));
      if (auto rev = graph.find_edge(edge.dst, edge.src)) {
        combined += w.reverse_edge * ef.row(static_cast<Eigen::Index>(*rev));
      }
      out = s * combined;
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (info.cluster_of[v] >= matched_edges.size()) {
      pooled_features.row(info.cluster_of[v]) = features.row(v);
    }
  }

  // Edges: the out-edges of pooled node a are the images of its members'
  // out-edge ranges. Sort that small set by pooled destination and collapse
  // duplicates; self-loops (both ends in a) vanish.
  struct Image {
    NodeId dst;
    std::size_t edge;
  };
  const auto image_less = [](const Image& x, const Image& y) { return x.dst != y.dst ? x.dst < y.dst : x.edge < y.edge; };
  const std::size_t m = info.pooled_num_nodes;
  std::vector<std::array<NodeId, 2>> members(m, {kUnassigned, kUnassigned});
  for (std::size_t k = 0; k < info.matching.size(); ++k) members[k] = {info.matching[k].src, info.matching[k].dst};
  for (NodeId v = 0; v < n; ++v) {
    if (info.cluster_of[v] >= info.matching.size()) members[info.cluster_of[v]][0] = v;
  }

  std::vector<Edge> pooled_edges;
  pooled_edges.reserve(graph.num_edges());
  std::vector<std::pair<std::size_t, std::size_t>> feature_sources;  // (pooled edge, input edge)
  std::vector<Image> images;
  for (std::size_t a = 0; a < m; ++a) {
    images.clear();
    for (NodeId u : members[a]) {
      if (u == kUnassigned) continue;
      const Graph::EdgeRange range = graph.out_edges(u);
      for (std::size_t e = range.first; e < range.last; ++e) {
        const NodeId b = info.cluster_of[graph.edge(e).dst];
        if (b != a) images.push_back({b, e});
      }
    }
    std::sort(images.begin(), images.end(), image_less);
    for (const Image& im : images) {
      const Edge pe{static_cast<NodeId>(a), im.dst};
      if (pooled_edges.empty() || pooled_edges.back() != pe) pooled_edges.push_back(pe);
      if (graph.has_edge_features()) feature_sources.emplace_back(pooled_edges.size() - 1, im.edge);
    }
  }

  std::optional<Matrix> pooled_edge_features;
  if (graph.has_edge_features()) {
    const Matrix& ef = *graph.edge_features();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(pooled_edges.size()), ef.cols());
    for (const auto& [pooled, input] : feature_sources) {
      out.row(static_cast<Eigen::Index>(pooled)) += ef.row(static_cast<Eigen::Index>(input));
    }
    pooled_edge_features = std::move(out);
  }

  PoolResult result;
  result.pooled = make_graph_unchecked(m, std::move(pooled_edges), std::move(pooled_features),
                                       std::move(pooled_edge_features));
  result.info = std::move(info);
  result.scores = std::move(scores);
  return result;
}

PoolResult contract(const Graph& graph, std::span<const std::size_t> matched_edges, EdgeScores scores,
                    const PoolOptions& options) {
  return contract(graph, graph.node_features(), matched_edges, std::move(scores), options);
}

PoolResult edgepool_forward(const Graph& graph, const Matrix& features, const PoolParams& params,
                            const PoolOptions& options) {
  EdgeScores scores;
  scores.raw = raw_scores(graph, features, params);
  if (options.training && options.dropout_p > 0.0) {
    scores = apply_score_dropout(std::move(scores), options.dropout_p, options.seed);
  } else {
    scores.dropped.assign(graph.num_edges(), 0);
  }
  scores.normalized = normalize_scores(graph, scores.raw, scores.dropped);
  const std::vector<std::size_t> matched = select_contractions(graph, scores);
  return contract(graph, features, matched, std::move(scores), options);
}

PoolResult edgepool_forward(const Graph& graph, const PoolParams& params, const PoolOptions& options) {
  return edgepool_forward(graph, graph.node_features(), params, options);
}

PoolGradients edgepool_backward(const Graph& graph, const Matrix& features, const PoolParams& params,
                                const PoolInfo& info, const EdgeScores& scores, const Matrix& upstream,
                                const PoolOptions& options, std::span<const double> score_upstream) {
  check_params(graph, features, params);
  if (info.cluster_of.size() != graph.num_nodes() || info.node_score.size() != graph.num_nodes() ||
      info.matched_edges.size() != info.matching.size()) {
    throw PoolError("pool info does not belong to this graph");
  }
  if (scores.normalized.size() != graph.num_edges() || scores.raw.size() != graph.num_edges()) {
    throw PoolError("edge scores from the forward pass are missing");
  }
  if (static_cast<std::size_t>(upstream.rows()) != info.pooled_num_nodes || upstream.cols() != features.cols()) {
    throw PoolError("upstream gradient shape does not match pooled features");
  }
  if (!score_upstream.empty() && score_upstream.size() != info.matched_edges.size()) {
    throw PoolError("score gradient must have one entry per contracted edge");
  }

  const Eigen::Index f = features.cols();
  PoolGradients grads;
  grads.node_features = Matrix::Zero(features.rows(), f);
  grads.weight = Vector::Zero(params.weight.size());
  grads.bias = 0.0;

  // Gradient reaching each edge's raw score, accumulated sparsely.
  std::vector<double> grad_raw(graph.num_edges(), 0.0);

  for (std::size_t k = 0; k < info.matched_edges.size(); ++k) {
    const std::size_t e = info.matched_edges[k];
    const Edge& edge = graph.edge(e);
    const double s = scores.normalized[e];
    const auto g = upstream.row(static_cast<Eigen::Index>(k));

    double grad_s = 0.0;
    if (options.combiner == MergeCombiner::sum) {
      grads.node_features.row(edge.src) += s * g;
      grads.node_features.row(edge.dst) += s * g;
      grad_s = g.dot(features.row(edge.src) + features.row(edge.dst));
    } else {
      const LinearMergeWeights& w = options.merge_weights;
      const Matrix& ef = *graph.edge_features();
      grads.node_features.row(edge.src) += (s * w.source) * g;
      grads.node_features.row(edge.dst) += (s * w.target) * g;
      RowVector combined = w.source * features.row(edge.src) + w.target * features.row(edge.dst) +
                           w.forward_edge * ef.row(static_cast<Eigen::Index>(e));
      if (auto rev = graph.find_edge(edge.dst, edge.src)) {
        combined += w.reverse_edge * ef.row(static_cast<Eigen::Index>(*rev));
      }
      grad_s = g.dot(combined);
    }
    if (!score_upstream.empty()) grad_s += score_upstream[k];

    // s_e = 0.5 + p_e with p the softmax over dst's live in-edges:
    // dp_e/dr_q = p_e (delta_eq - p_q).
    const double p_e = s - 0.5;
    for (std::size_t q : graph.in_edges(edge.dst)) {
      if (scores.is_dropped(q)) continue;
      const double p_q = scores.normalized[q] - 0.5;
      grad_raw[q] += grad_s * p_e * ((q == e ? 1.0 : 0.0) - p_q);
    }
  }

  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (info.cluster_of[v] >= info.matched_edges.size()) {
      grads.node_features.row(v) += upstream.row(info.cluster_of[v]);
    }
  }

  const auto w_src = params.weight.head(f);
  const auto w_dst = params.weight.segment(f, f);
  const Eigen::Index gw = static_cast<Eigen::Index>(graph.edge_feature_width());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const double gr = grad_raw[e];
    if (gr == 0.0) continue;
    const Edge& edge = graph.edge(e);
    grads.weight.head(f) += gr * features.row(edge.src).transpose();
    grads.weight.segment(f, f) += gr * features.row(edge.dst).transpose();
    if (gw > 0) grads.weight.tail(gw) += gr * graph.edge_features()->row(static_cast<Eigen::Index>(e)).transpose();
    grads.bias += gr;
    grads.node_features.row(edge.src) += gr * w_src.transpose();
    grads.node_features.row(edge.dst) += gr * w_dst.transpose();
  }
  return grads;
}

std::vector<NodeId> compose_clusters(std::span<const PoolInfo> levels) {
  if (levels.empty()) return {};
  std::vector<NodeId> map = levels.front().cluster_of;
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const PoolInfo& level = levels[l];
    if (level.input_num_nodes() != levels[l - 1].pooled_num_nodes) {
      throw PoolError("pooling levels do not chain: level " + std::to_string(l) + " input size mismatch");
    }
    for (NodeId& c : map) c = level.cluster_of[c];
  }
  return map;
}

std::vector<std::uint32_t> pool_graph_ids(std::span<const std::uint32_t> graph_id, const PoolInfo& info) {
  if (graph_id.size() != info.input_num_nodes()) throw PoolError("graph_id length does not match pool input");
  std::vector<std::uint32_t> pooled(info.pooled_num_nodes, 0);
  for (std::size_t v = 0; v < graph_id.size(); ++v) pooled[info.cluster_of[v]] = graph_id[v];
  return pooled;
}

} // namespace edgepool
