#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "edgepool/checkpoint.hpp"
#include "edgepool/graph_io.hpp"
#include "edgepool/hierarchy.hpp"
#include "edgepool/models.hpp"
#include "edgepool/rng.hpp"
#include "test_support.hpp"

using namespace edgepool;
using namespace edgepool::testing;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("graph JSON round trip") {
  Rng rng(1);
  const Graph g = erdos_renyi_graph(12, 0.3, 3, rng);
  const LabeledGraph back = graph_from_json(graph_to_json(g));
  CHECK(back.graph == g);
  CHECK_FALSE(back.label.has_value());

  LabeledGraph lg{build_graph(2, {{0, 1}}, column({0.1, 0.2}), column({3.5})), 4, std::vector<int>{1, 0}};
  const fs::path path = fs::temp_directory_path() / "edgepool_test_graph.json";
  write_graph_json(path, lg);
  const LabeledGraph read = read_graph_json(path);
  CHECK(read.graph == lg.graph);
  CHECK(read.label == 4);
  CHECK(read.node_labels == lg.node_labels);
}

TEST_CASE("graph JSON errors") {
  CHECK_THROWS_AS(graph_from_json(json::array()), FormatError);
  CHECK_THROWS_AS(graph_from_json(json{{"num_nodes", 2}, {"edges", json::array()}}), FormatError);
  const json bad_edge = {{"num_nodes", 2}, {"edges", {{0, 5}}}, {"node_features", {{0}, {0}}}};
  CHECK_THROWS_AS(graph_from_json(bad_edge), GraphError);
  const json rows = {{"num_nodes", 2}, {"edges", json::array()}, {"node_features", {{0}}}};
  CHECK_THROWS_AS(graph_from_json(rows), GraphError);
  const json text = {{"num_nodes", 1}, {"edges", json::array()}, {"node_features", {{"x"}}}};
  CHECK_THROWS_AS(graph_from_json(text), FormatError);
  CHECK_THROWS_AS(read_graph_json("/nonexistent/edgepool.json"), FormatError);
}

TEST_CASE("hierarchy JSON round trip") {
  Rng rng(2);
  const Graph g = erdos_renyi_graph(30, 0.15, 2, rng);
  const std::vector<PoolParams> params{random_params(2, 0, rng), random_params(2, 0, rng)};
  const auto levels = pool_hierarchy(g, params);
  const auto back = hierarchy_from_json(hierarchy_to_json(levels));
  REQUIRE(back.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back[k].pooled == levels[k].pooled);
    CHECK(back[k].info.cluster_of == levels[k].info.cluster_of);
    CHECK(back[k].info.matching == levels[k].info.matching);
    CHECK(back[k].info.node_score == levels[k].info.node_score);
  }
  CHECK(pool_hierarchy(g, std::span<const PoolParams>()).empty());
}

TEST_CASE("checkpoint round trip") {
  ModelConfig cfg;
  cfg.in_features = 3;
  cfg.channels = 4;
  GraphClassifier a(cfg, 1);
  GraphClassifier b(cfg, 2);
  const json config = {{"note", "x"}};
  const json j = checkpoint_to_json(a.params(), config);
  CHECK(j["format_version"] == kCheckpointFormatVersion);
  CHECK(load_checkpoint_json(j, b.params()) == config);
  for (std::size_t i = 0; i < a.params().size(); ++i) CHECK(a.params().all()[i].value == b.params().all()[i].value);

  const fs::path path = fs::temp_directory_path() / "edgepool_test_ckpt.json";
  save_checkpoint(path, a.params(), config);
  GraphClassifier c(cfg, 3);
  load_checkpoint(path, c.params());
  CHECK(c.params().all().front().value == a.params().all().front().value);

  json missing = j;
  missing["params"].erase(missing["params"].begin());
  CHECK_THROWS_AS(load_checkpoint_json(missing, b.params()), FormatError);

  ModelConfig wider = cfg;
  wider.channels = 5;
  GraphClassifier d(wider, 1);
  CHECK_THROWS_AS(load_checkpoint_json(j, d.params()), FormatError);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  Rng x = make_rng(5, "stream");
  Rng y = make_rng(5, "stream");
  CHECK(x() == y());
}
