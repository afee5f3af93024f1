#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgepool/graph_io.hpp"
#include "edgepool_cli/bench.hpp"
#include "edgepool_cli/commands.hpp"
#include "edgepool_cli/gradcheck.hpp"
#include "test_support.hpp"

using namespace edgepool;
using namespace edgepool::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "edgepool");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("edgepool_cli_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("pool on a tiny path") {
  const fs::path dir = scratch("pool");
  fs::create_directories(dir);
  const Graph path = testing::undirected(3, {{0, 1}, {1, 2}}, testing::column({1, 2, 3}));
  write_graph_json(dir / "path.json", {path, std::nullopt, std::nullopt});

  const Run r = run({"pool", "--input", (dir / "path.json").string(), "--levels", "1", "--random-seed", "3", "--out",
                     (dir / "out").string()});
  REQUIRE(r.code == 0);
  const json h = read_json(dir / "out" / "hierarchy.json");
  REQUIRE(h.size() == 1);
  CHECK(h[0]["graph"]["num_nodes"] == 2);
  const std::string dot0 = slurp(dir / "out" / "level_0.dot");
  // Two clusters: every node statement carries one of two fill colours.
  std::set<std::string> colours;
  for (auto pos = dot0.find(", fillcolor=\""); pos != std::string::npos; pos = dot0.find(", fillcolor=\"", pos + 1)) {
    const auto start = pos + 13;
    colours.insert(dot0.substr(start, dot0.find('"', start) - start));
  }
  colours.erase("white");
  CHECK(colours.size() == 2);
  CHECK(fs::exists(dir / "out" / "level_1.dot"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));

  const Run zero = run({"pool", "--input", (dir / "path.json").string(), "--levels", "0", "--random-seed", "3",
                        "--out", (dir / "zero").string()});
  REQUIRE(zero.code == 0);
  CHECK(fs::exists(dir / "zero" / "level_0.dot"));
  CHECK_FALSE(fs::exists(dir / "zero" / "level_1.dot"));
}

TEST_CASE("pool on a TU graph writes one DOT file per level") {
  const fs::path dir = scratch("pool_tu");
  const Run r = run({"pool", "--tu", EDGEPOOL_TEST_FIXTURES, "TINY", "--index", "0", "--levels", "3",
                     "--random-seed", "1", "--out", dir.string()});
  REQUIRE(r.code == 0);
  for (int k = 0; k <= 3; ++k) CHECK(fs::exists(dir / ("level_" + std::to_string(k) + ".dot")));
}

TEST_CASE("input errors exit with code 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"nope"}).code == 2);
  CHECK(run({"pool", "--input", "/nonexistent.json", "--random-seed", "1", "--out", scratch("x").string()}).code == 2);
  CHECK(run({"train-graph", "--tu", "/nonexistent", "X", "--out", scratch("y").string()}).code == 2);
  CHECK(run({"gradcheck", "--cases", "bogus"}).code == 2);
}

TEST_CASE("train-graph smoke run on a synthetic dataset") {
  const fs::path dir = scratch("tg");
  const Run r = run({"train-graph", "--synthetic", "path_proteinlike", "--num-graphs", "20", "--num-nodes", "12",
                     "--folds", "2", "--epochs", "2", "--channels", "8", "--seed", "4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const json s = read_json(dir / "summary.json");
  CHECK(s["folds"].size() == 2);
  CHECK(s.contains("mean_acc"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "fold_0_history.csv"));
}

TEST_CASE("cross-validation does not depend on the number of jobs") {
  SyntheticParams p;
  p.num_graphs = 16;
  p.num_nodes = 10;
  const auto ds = std::get<GraphDataset>(gen_synthetic(SyntheticKind::path_proteinlike, p, 1));
  CrossValidationOptions opts;
  opts.train.epochs = 2;
  opts.train.channels = 8;
  opts.folds = 4;
  const json serial = cross_validate_graph_classifier(ds, opts);
  opts.jobs = 3;
  CHECK(cross_validate_graph_classifier(ds, opts) == serial);
}

TEST_CASE("train-node on the SBM task is deterministic") {
  const fs::path a = scratch("tn_a"), b = scratch("tn_b");
  const std::vector<std::string> common{"train-node", "--synthetic", "sbm", "--epochs", "5", "--channels", "8",
                                        "--seed", "2"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(read_json(a / "summary.json") == read_json(b / "summary.json"));
  CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
  CHECK(read_json(a / "summary.json").contains("test_acc"));

  auto none = common;
  none.insert(none.end(), {"--pooling", "none", "--out", scratch("tn_none").string()});
  CHECK(run(none).code == 0);
}

TEST_CASE("gradcheck command and negative control") {
  const Run ok = run({"gradcheck", "--cases", "unpool"});
  CHECK(ok.code == 0);
  const Run bad = run({"gradcheck", "--cases", "unpool", "--corrupt-gradient"});
  CHECK(bad.code == 1);

  GradcheckOptions corrupt;
  corrupt.corrupt_gradient = true;
  for (const GradcheckResult& r : run_gradcheck("layers", corrupt)) CHECK_FALSE(r.passed);
  CHECK_THROWS_AS(run_gradcheck("bogus", {}), std::invalid_argument);
}

TEST_CASE("bench with a single size") {
  const Run r = run({"bench", "--min-edges", "1000", "--max-edges", "1000", "--points", "1", "--min-seconds", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("edges,nodes,pool_time,peak_aux_memory") != std::string::npos);

  BenchOptions opts;
  opts.min_edges = opts.max_edges = 1000;
  opts.points = 1;
  opts.min_seconds = 0.0;
  const auto rows = run_bench(opts);
  REQUIRE(rows.size() == 1);
  const std::string csv = bench_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("loglog_slope") {
  const std::vector<double> x{1, 10, 100}, y{3, 30, 300}, y2{1, 100, 10000};
  CHECK(loglog_slope(x, y) == doctest::Approx(1.0));
  CHECK(loglog_slope(x, y2) == doctest::Approx(2.0));
  CHECK(std::isnan(loglog_slope(std::vector<double>{1}, std::vector<double>{1})));
}
