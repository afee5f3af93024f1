#include <benchmark/benchmark.h>

#include "edgepool/dataset.hpp"
#include "edgepool/edgepool.hpp"
#include "edgepool/layers.hpp"
#include "edgepool/models.hpp"

using namespace edgepool;

namespace {

Graph sparse_graph(std::int64_t directed_edges, std::size_t width) {
  Rng rng(1);
  const auto undirected = static_cast<std::size_t>(directed_edges / 2);
  return random_sparse_graph(std::max<std::size_t>(8, undirected / 2), undirected, width, rng);
}

PoolParams params_for(std::size_t width) {
  PoolParams p;
  p.weight = Vector::LinSpaced(static_cast<Eigen::Index>(2 * width), -1.0, 1.0);
  p.bias = 0.1;
  return p;
}

void BM_EdgePoolForward(benchmark::State& state) {
  const Graph g = sparse_graph(state.range(0), 8);
  const PoolParams p = params_for(8);
  for (auto _ : state) benchmark::DoNotOptimize(edgepool_forward(g, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.num_edges()));
}
BENCHMARK(BM_EdgePoolForward)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

void BM_EdgePoolBackward(benchmark::State& state) {
  const Graph g = sparse_graph(state.range(0), 8);
  const PoolParams p = params_for(8);
  const PoolResult r = edgepool_forward(g, p);
  const Matrix up = Matrix::Ones(static_cast<Eigen::Index>(r.pooled.num_nodes()), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(edgepool_backward(g, g.node_features(), p, r.info, r.scores, up));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.num_edges()));
}
BENCHMARK(BM_EdgePoolBackward)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

void BM_SelectContractions(benchmark::State& state) {
  const Graph g = sparse_graph(state.range(0), 8);
  EdgeScores s;
  s.raw = raw_scores(g, params_for(8));
  s.normalized = normalize_scores(g, s.raw);
  for (auto _ : state) benchmark::DoNotOptimize(select_contractions(g, s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.num_edges()));
}
BENCHMARK(BM_SelectContractions)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

void BM_MeanConv(benchmark::State& state) {
  const Graph g = sparse_graph(state.range(0), 64);
  Rng rng(2);
  ParamStore store;
  const Matrix& ws = store.add_glorot("ws", 64, 64, rng).value;
  const Matrix& wn = store.add_glorot("wn", 64, 64, rng).value;
  const Matrix b = Matrix::Zero(1, 64);
  for (auto _ : state) benchmark::DoNotOptimize(mean_conv_forward(g, g.node_features(), ws, &wn, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.num_edges()));
}
BENCHMARK(BM_MeanConv)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

void BM_GraphClassifierStep(benchmark::State& state) {
  Rng rng(3);
  std::vector<Graph> graphs;
  for (int i = 0; i < 128; ++i) graphs.push_back(erdos_renyi_graph(40, 0.1, 3, rng));
  const BatchedGraph b = batch(std::span<const Graph>(graphs));
  ModelConfig cfg;
  cfg.in_features = 3;
  GraphClassifier model(cfg, 1);
  const std::vector<int> labels(128, 0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    model.params().zero_grad();
    const LossAndGrad lg = softmax_cross_entropy(model.forward(b, {true, seed++}), labels);
    model.backward(lg.grad);
  }
}
BENCHMARK(BM_GraphClassifierStep)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
