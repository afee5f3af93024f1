#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <vector>

#include "edgepool/dataset.hpp"
#include "edgepool/edgepool.hpp"
#include "edgepool/graph.hpp"
#include "edgepool/matrix.hpp"
#include "edgepool/rng.hpp"

namespace edgepool::testing {

inline Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index r = 0;
  for (double v : values) m(r++, 0) = v;
  return m;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline PoolParams random_params(std::size_t width, std::size_t edge_width, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  PoolParams p;
  p.weight.resize(static_cast<Eigen::Index>(PoolParams::weight_length(width, edge_width)));
  for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight[i] = normal(rng);
  p.bias = normal(rng);
  return p;
}

/// Graph on the given undirected pairs, both directions, with given features.
inline Graph undirected(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs, Matrix features) {
  std::vector<Edge> edges;
  for (auto [a, b] : pairs) {
    edges.push_back({a, b});
    edges.push_back({b, a});
  }
  return build_graph(n, std::move(edges), std::move(features));
}

/// A random graph from one of four families, 2..max_nodes nodes.
inline Graph random_family_graph(Rng& rng, std::size_t max_nodes, std::size_t width) {
  std::uniform_int_distribution<std::size_t> size(2, max_nodes);
  const std::size_t n = size(rng);
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: {
      const double mean_degree = std::uniform_real_distribution<double>(1.0, 6.0)(rng);
      return erdos_renyi_graph(n, std::min(1.0, mean_degree / static_cast<double>(n)), width, rng);
    }
    case 1: return cycle_graph(std::max<std::size_t>(n, 3), width, rng);
    case 2: return star_graph(n - 1, width, rng);
    default: return path_graph(n, width, rng);
  }
}

/// Repeated argmax over the remaining selectable edges: O(E^2), no sorting.
/// Ties go to the lowest canonical index.
inline std::vector<std::size_t> naive_matching(const Graph& graph, const EdgeScores& scores) {
  const std::size_t m = graph.num_edges();
  std::vector<bool> used_node(graph.num_nodes(), false);
  std::vector<bool> gone(m, false);
  for (std::size_t e = 0; e < m; ++e) gone[e] = scores.is_dropped(e);
  std::vector<std::size_t> out;
  while (true) {
    std::size_t best = m;
    for (std::size_t e = 0; e < m; ++e) {
      if (gone[e]) continue;
      const Edge& ed = graph.edge(e);
      if (used_node[ed.src] || used_node[ed.dst]) {
        gone[e] = true;
        continue;
      }
      if (best == m || scores.normalized[e] > scores.normalized[best]) best = e;
    }
    if (best == m) return out;
    out.push_back(best);
    gone[best] = true;
    used_node[graph.edge(best).src] = true;
    used_node[graph.edge(best).dst] = true;
  }
}

/// Softmax over each destination's kept in-edges, computed edge by edge from
/// the definition.
inline std::vector<double> reference_normalized(const Graph& graph, const std::vector<double>& raw,
                                                const std::vector<std::uint8_t>& dropped) {
  const std::size_t m = graph.num_edges();
  std::vector<double> out(m, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    if (!dropped.empty() && dropped[e]) continue;
    double denom = 0.0;
    for (std::size_t f = 0; f < m; ++f) {
      if (graph.edge(f).dst != graph.edge(e).dst) continue;
      if (!dropped.empty() && dropped[f]) continue;
      denom += std::exp(raw[f] - raw[e]);
    }
    out[e] = 0.5 + 1.0 / denom;
  }
  return out;
}

inline bool is_connected(const Graph& graph) {
  if (graph.num_nodes() == 0) return true;
  std::vector<bool> seen(graph.num_nodes(), false);
  std::queue<NodeId> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop();
    const auto r = graph.out_edges(v);
    for (std::size_t e = r.first; e < r.last; ++e) {
      const NodeId w = graph.edge(e).dst;
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        q.push(w);
      }
    }
  }
  return count == graph.num_nodes();
}

/// Relabels node v as perm[v].
inline Graph permute(const Graph& graph, const std::vector<NodeId>& perm) {
  std::vector<Edge> edges;
  for (const Edge& e : graph.edges()) edges.push_back({perm[e.src], perm[e.dst]});
  Matrix x(graph.node_features().rows(), graph.node_features().cols());
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) x.row(perm[v]) = graph.node_features().row(v);
  return build_graph(graph.num_nodes(), std::move(edges), std::move(x));
}

} // namespace edgepool::testing
