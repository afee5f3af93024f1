#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "edgepool/dataset.hpp"

namespace edgepool {

namespace {

Matrix gaussian_features(std::size_t n, std::size_t width, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = normal(rng);
  }
  return x;
}

void add_undirected(std::vector<Edge>& edges, NodeId a, NodeId b) {
  edges.push_back({a, b});
  edges.push_back({b, a});
}

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("gen_synthetic: " + what);
}

} // namespace

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "erdos_renyi") return SyntheticKind::erdos_renyi;
  if (name == "sbm_node_task" || name == "sbm") return SyntheticKind::sbm_node_task;
  if (name == "path_proteinlike") return SyntheticKind::path_proteinlike;
  if (name == "cycle") return SyntheticKind::cycle;
  if (name == "star") return SyntheticKind::star;
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::erdos_renyi: return "erdos_renyi";
    case SyntheticKind::sbm_node_task: return "sbm_node_task";
    case SyntheticKind::path_proteinlike: return "path_proteinlike";
    case SyntheticKind::cycle: return "cycle";
    case SyntheticKind::star: return "star";
  }
  return "unknown";
}

Graph erdos_renyi_graph(std::size_t n, double p, std::size_t feature_width, Rng& rng) {
  check(p >= 0.0 && p <= 1.0, "edge probability must lie in [0, 1]");
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (coin(rng)) add_undirected(edges, i, j);
    }
  }
  Matrix x = gaussian_features(n, feature_width, rng);
  return build_graph(n, std::move(edges), std::move(x));
}

Graph cycle_graph(std::size_t n, std::size_t feature_width, Rng& rng) {
  check(n >= 3, "a cycle needs at least 3 nodes");
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) add_undirected(edges, i, static_cast<NodeId>((i + 1) % n));
  return build_graph(n, std::move(edges), gaussian_features(n, feature_width, rng));
}

Graph star_graph(std::size_t leaves, std::size_t feature_width, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId i = 1; i <= leaves; ++i) add_undirected(edges, 0, i);
  return build_graph(leaves + 1, std::move(edges), gaussian_features(leaves + 1, feature_width, rng));
}

Graph path_graph(std::size_t n, std::size_t feature_width, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) add_undirected(edges, i, i + 1);
  return build_graph(n, std::move(edges), gaussian_features(n, feature_width, rng));
}

Graph random_sparse_graph(std::size_t n, std::size_t undirected_edges, std::size_t feature_width, Rng& rng) {
  check(n >= 2, "need at least 2 nodes");
  check(undirected_edges <= n * (n - 1) / 2, "too many edges for a simple graph");
  std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(undirected_edges * 2);
  std::vector<Edge> edges;
  edges.reserve(2 * undirected_edges);
  while (seen.size() < undirected_edges) {
    auto a = pick(rng);
    auto b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert(a * n + b).second) add_undirected(edges, static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  return build_graph(n, std::move(edges), gaussian_features(n, feature_width, rng));
}

std::variant<GraphDataset, NodeTask> gen_synthetic(SyntheticKind kind, const SyntheticParams& params,
                                                   std::uint64_t seed) {
  Rng rng = make_rng(seed, "synthetic-" + to_string(kind));
  const std::size_t n = params.num_nodes;

  if (kind == SyntheticKind::sbm_node_task) {
    check(params.blocks >= 1 && n >= params.blocks, "sbm needs at least one node per block");
    check(params.p_in >= 0.0 && params.p_in <= 1.0 && params.p_out >= 0.0 && params.p_out <= 1.0,
          "sbm probabilities must lie in [0, 1]");
    check(params.feature_noise >= 0.0, "feature noise must be non-negative");
    std::vector<int> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = static_cast<int>(i * params.blocks / n);
    std::bernoulli_distribution in(params.p_in);
    std::bernoulli_distribution out(params.p_out);
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (block[i] == block[j] ? in(rng) : out(rng)) add_undirected(edges, i, j);
      }
    }
    const std::size_t width = std::max(params.feature_width, params.blocks);
    std::normal_distribution<double> noise(0.0, params.feature_noise);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < width; ++c) {
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            (static_cast<int>(c) == block[i] ? 1.0 : 0.0) + noise(rng);
      }
    }
    Graph graph = build_graph(n, std::move(edges), std::move(x));
    return node_split(std::move(graph), std::move(block), params.per_class_train, params.per_class_test,
                      derive_seed(seed, "sbm-split"));
  }

  check(params.num_graphs >= 1, "num_graphs must be positive");
  GraphDataset ds;
  ds.name = to_string(kind);
  for (std::size_t g = 0; g < params.num_graphs; ++g) {
    switch (kind) {
      case SyntheticKind::erdos_renyi:
        ds.graphs.push_back(erdos_renyi_graph(n, params.edge_probability, params.feature_width, rng));
        break;
      case SyntheticKind::cycle:
        ds.graphs.push_back(cycle_graph(n, params.feature_width, rng));
        break;
      case SyntheticKind::star:
        check(n >= 2, "a star needs at least 2 nodes");
        ds.graphs.push_back(star_graph(n - 1, params.feature_width, rng));
        break;
      case SyntheticKind::path_proteinlike: {
        check(n >= 4, "path_proteinlike needs at least 4 nodes");
        std::uniform_int_distribution<std::size_t> size_dist(n / 2, n);
        const std::size_t m = std::max<std::size_t>(4, size_dist(rng));
        std::vector<Edge> edges;
        for (NodeId i = 0; i + 1 < m; ++i) add_undirected(edges, i, i + 1);
        // Short-range chords, like contacts between nearby residues.
        std::uniform_int_distribution<std::size_t> chord_count(0, m / 2);
        std::uniform_int_distribution<std::size_t> start(0, m - 4);
        std::uniform_int_distribution<std::size_t> span(2, 3);
        std::set<Edge> chords;
        const std::size_t want = chord_count(rng);
        for (std::size_t k = 0; k < want; ++k) {
          const auto a = static_cast<NodeId>(start(rng));
          const auto b = static_cast<NodeId>(std::min<std::size_t>(a + span(rng), m - 1));
          if (chords.insert({a, b}).second) add_undirected(edges, a, b);
        }
        std::vector<double> degree(m, 0.0);
        for (const Edge& e : edges) degree[e.src] += 1.0;
        const std::size_t width = std::max<std::size_t>(params.feature_width, 2);
        Matrix x = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(width));
        for (std::size_t i = 0; i < m; ++i) {
          x(static_cast<Eigen::Index>(i), 0) = 1.0;
          x(static_cast<Eigen::Index>(i), 1) = degree[i] / 4.0;
        }
        ds.graphs.push_back(build_graph(m, std::move(edges), std::move(x)));
        ds.labels.push_back(static_cast<int>(chords.size() * 1000 / m));  // density, thresholded below
        break;
      }
      case SyntheticKind::sbm_node_task:
        break;
    }
  }

  if (kind == SyntheticKind::path_proteinlike) {
    std::vector<int> density = ds.labels;
    std::nth_element(density.begin(), density.begin() + static_cast<std::ptrdiff_t>(density.size() / 2),
                     density.end());
    const int median = density[density.size() / 2];
    for (int& l : ds.labels) l = l >= median ? 1 : 0;
    ds.num_classes = 2;
  } else {
    ds.labels.assign(ds.graphs.size(), 0);
    ds.num_classes = 1;
  }
  return ds;
}

} // namespace edgepool
