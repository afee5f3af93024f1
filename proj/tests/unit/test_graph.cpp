#include <doctest.h>

#include <set>
#include <string>

#include "edgepool/graph.hpp"
#include "test_support.hpp"

using namespace edgepool;
using edgepool::testing::column;
using edgepool::testing::undirected;

namespace {

GraphErrc error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const GraphError& e) {
    return e.code();
  }
  FAIL("expected GraphError");
  return GraphErrc::index_out_of_range;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

} // namespace

TEST_CASE("build_graph accepts a minimal symmetric pair") {
  const Graph g = build_graph(2, {{0, 1}, {1, 0}}, column({1.0, 2.0}));
  CHECK(g.num_nodes() == 2);
  CHECK(g.num_edges() == 2);
  CHECK(g.feature_width() == 1);
  CHECK(is_symmetric(g));
}

TEST_CASE("build_graph rejects malformed input") {
  CHECK(error_code([] { build_graph(2, {{0, 2}}, column({0, 0})); }) == GraphErrc::index_out_of_range);
  CHECK(error_code([] { build_graph(2, {{0, 1}, {0, 1}}, column({0, 0})); }) == GraphErrc::duplicate_edge);
  CHECK(error_code([] { build_graph(2, {{1, 1}}, column({0, 0})); }) == GraphErrc::self_loop);
  CHECK(error_code([] { build_graph(3, {}, column({0, 0})); }) == GraphErrc::dimension_mismatch);
  CHECK(error_code([] { build_graph(2, {{0, 1}}, column({0, 0}), Matrix::Zero(2, 1)); }) ==
        GraphErrc::dimension_mismatch);
}

TEST_CASE("edges are stored in (src, dst) order with their features") {
  Matrix ef(3, 1);
  ef << 30, 10, 20;
  const Graph g = build_graph(3, {{2, 0}, {0, 1}, {1, 2}}, column({0, 0, 0}), ef);
  REQUIRE(g.num_edges() == 3);
  CHECK(g.edge(0) == Edge{0, 1});
  CHECK(g.edge(1) == Edge{1, 2});
  CHECK(g.edge(2) == Edge{2, 0});
  CHECK((*g.edge_features())(0, 0) == 10);
  CHECK((*g.edge_features())(1, 0) == 20);
  CHECK((*g.edge_features())(2, 0) == 30);
  CHECK(g.find_edge(1, 2) == std::optional<std::size_t>{1});
  CHECK_FALSE(g.find_edge(2, 1).has_value());
}

TEST_CASE("symmetrize") {
  const Graph one = build_graph(2, {{0, 1}}, column({0, 0}));
  const Graph s = symmetrize(one);
  REQUIRE(s.num_edges() == 2);
  CHECK(s.edge(0) == Edge{0, 1});
  CHECK(s.edge(1) == Edge{1, 0});

  const Graph sym = undirected(3, {{0, 1}, {1, 2}}, column({1, 2, 3}));
  CHECK(symmetrize(sym) == sym);

  const Graph empty = build_graph(3, {}, column({1, 2, 3}));
  CHECK(symmetrize(empty) == empty);
}

TEST_CASE("symmetrize copies the forward edge's features onto added edges") {
  Matrix ef(1, 2);
  ef << 5, 6;
  const Graph s = symmetrize(build_graph(2, {{1, 0}}, column({0, 0}), ef));
  REQUIRE(s.num_edges() == 2);
  CHECK(s.edge_features()->row(0) == ef.row(0));
  CHECK(s.edge_features()->row(1) == ef.row(0));
}

TEST_CASE("in_neighbors") {
  const Graph path = undirected(3, {{0, 1}, {1, 2}}, column({0, 0, 0}));
  CHECK(in_neighbors(path, 1) == std::vector<NodeId>{0, 2});

  const Graph isolated = build_graph(2, {}, column({0, 0}));
  CHECK(in_neighbors(isolated, 1).empty());

  const Graph star = undirected(4, {{0, 1}, {0, 2}, {0, 3}}, column({0, 0, 0, 0}));
  CHECK(in_neighbors(star, 0) == std::vector<NodeId>{1, 2, 3});
  CHECK(star.in_degree(0) == 3);
  CHECK_THROWS_AS(star.in_degree(4), GraphError);
}

TEST_CASE("in_edges of a copy stay valid after the original is gone") {
  std::optional<Graph> original = undirected(3, {{0, 1}, {1, 2}}, column({0, 0, 0}));
  const Graph copy = *original;
  original.reset();
  const auto in = copy.in_edges(1);
  REQUIRE(in.size() == 2);
  CHECK(copy.edge(in[0]) == Edge{0, 1});
  CHECK(copy.edge(in[1]) == Edge{2, 1});
}

TEST_CASE("batch offsets node ids and records graph membership") {
  const Graph a = undirected(2, {{0, 1}}, column({1, 2}));
  const Graph b = undirected(3, {{0, 1}}, column({3, 4, 5}));
  const std::vector<Graph> graphs{a, b};
  const BatchedGraph bg = batch(std::span<const Graph>(graphs));
  CHECK(bg.graph.num_nodes() == 5);
  CHECK(bg.num_graphs == 2);
  CHECK(bg.graph_id == std::vector<std::uint32_t>{0, 0, 1, 1, 1});
  CHECK(bg.node_offset == std::vector<std::size_t>{0, 2, 5});
  CHECK(bg.graph.find_edge(2, 3).has_value());
  CHECK(bg.graph.find_edge(3, 2).has_value());
  CHECK(bg.graph.node_features()(4, 0) == 5);

  const std::vector<Graph> single{b};
  const BatchedGraph one = batch(std::span<const Graph>(single));
  CHECK(one.graph == b);
  CHECK(one.graph_id == std::vector<std::uint32_t>{0, 0, 0});

  CHECK_THROWS_AS(batch(std::span<const Graph>()), GraphError);
}

TEST_CASE("batch_layout") {
  const BatchLayout l = batch_layout(1001, 128);
  CHECK(l.full_batches == 7);
  CHECK(l.remainder == 105);
  CHECK(batch_layout(256, 128).remainder == 0);
  CHECK(batch_layout(256, 128).full_batches == 2);
}

TEST_CASE("to_dot") {
  const std::string lone = to_dot(build_graph(1, {}, column({0})));
  CHECK(count(lone, "label=") == 1);
  CHECK(count(lone, "->") == 0);

  const std::string pair = to_dot(undirected(2, {{0, 1}}, column({0, 0})));
  CHECK(count(pair, "->") == 1);
  CHECK(count(pair, "dir=none") == 1);

  DotOptions opts;
  opts.cluster_of = std::vector<NodeId>{0, 0, 1, 1};
  const std::string clustered = to_dot(undirected(4, {{0, 1}, {1, 2}, {2, 3}}, column({0, 0, 0, 0})), opts);
  CHECK(count(clustered, cluster_color(0)) == 2);
  CHECK(count(clustered, cluster_color(1)) == 2);
  CHECK(cluster_color(0) != cluster_color(1));

  opts.cluster_of = std::vector<NodeId>{0};
  CHECK_THROWS_AS(to_dot(build_graph(2, {}, column({0, 0})), opts), GraphError);
}

TEST_CASE("with_node_features keeps structure") {
  const Graph g = undirected(2, {{0, 1}}, column({1, 2}));
  const Graph h = g.with_node_features(column({7, 8}));
  CHECK(h.num_edges() == 2);
  CHECK(h.node_features()(1, 0) == 8);
  CHECK_THROWS_AS(g.with_node_features(column({1})), GraphError);
}
