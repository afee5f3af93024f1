#include <doctest.h>

#include "edgepool/layers.hpp"
#include "edgepool/models.hpp"
#include "edgepool/train.hpp"
#include "test_support.hpp"

using namespace edgepool;
using namespace edgepool::testing;

namespace {

ModelConfig small_config(std::size_t in, bool pooling, ConvKind conv = ConvKind::mean) {
  ModelConfig c;
  c.in_features = in;
  c.channels = 8;
  c.num_classes = 3;
  c.pooling = pooling;
  c.conv = conv;
  return c;
}

BatchedGraph toy_batch(Rng& rng) {
  const std::vector<Graph> graphs{cycle_graph(6, 2, rng), path_graph(5, 2, rng), star_graph(4, 2, rng)};
  return batch(std::span<const Graph>(graphs));
}

} // namespace

TEST_CASE("graph classifier produces one row of logits per graph") {
  Rng rng(1);
  const std::vector<Graph> one{cycle_graph(6, 2, rng)};
  const BatchedGraph b1 = batch(std::span<const Graph>(one));
  GraphClassifier model(small_config(2, true), 3);
  const Matrix logits = model.forward(b1, {});
  CHECK(logits.rows() == 1);
  CHECK(logits.cols() == 3);
  CHECK(model.last_pool_infos().size() == GraphClassifier::kBlocks);

  GraphClassifier base(small_config(2, false), 3);
  base.forward(b1, {});
  CHECK(base.last_pool_infos().empty());
  CHECK_FALSE(base.params().contains("pool0.weight"));
  CHECK(base.params().size() < model.params().size());
}

TEST_CASE("graph classifier forward is pure given params, input and seed") {
  Rng rng(2);
  const BatchedGraph b = toy_batch(rng);
  GraphClassifier model(small_config(2, true), 5);
  ForwardOptions train{true, 99};
  const Matrix a = model.forward(b, train);
  const Matrix c = model.forward(b, train);
  CHECK(a == c);
  CHECK(model.forward(b, {}) == model.forward(b, {}));
}

TEST_CASE("batch norm uses batch statistics in both modes") {
  Rng rng(3);
  const BatchedGraph b = toy_batch(rng);
  ModelConfig cfg = small_config(2, true);
  cfg.fc_dropout = 0.0;
  cfg.conv_dropout = 0.0;
  cfg.edge_score_dropout = 0.0;
  GraphClassifier model(cfg, 1);
  CHECK(model.forward(b, {true, 4}) == model.forward(b, {false, 4}));
}

TEST_CASE("graph classifier end-to-end gradient") {
  Rng rng(4);
  const std::vector<Graph> graphs{cycle_graph(6, 2, rng)};
  const BatchedGraph b = batch(std::span<const Graph>(graphs));
  GraphClassifier model(small_config(2, true), 7);
  const std::vector<int> labels{1};

  model.params().zero_grad();
  const LossAndGrad lg = softmax_cross_entropy(model.forward(b, {}), labels);
  const auto matching = model.last_pool_infos();
  model.backward(lg.grad);

  // The derivative only exists where a small step keeps every matching.
  bool stable = true;
  const auto loss = [&] {
    const double l = softmax_cross_entropy(model.forward(b, {}), labels).loss;
    const auto infos = model.last_pool_infos();
    for (std::size_t k = 0; k < infos.size(); ++k) stable = stable && infos[k].matched_edges == matching[k].matched_edges;
    return l;
  };
  const double h = 1e-6;
  std::size_t checked = 0, skipped = 0;
  for (Parameter& p : model.params().all()) {
    for (Eigen::Index i = 0; i < p.value.size(); i += 3) {
      const double keep = p.value.data()[i];
      stable = true;
      p.value.data()[i] = keep + h;
      const double hi = loss();
      p.value.data()[i] = keep - h;
      const double lo = loss();
      p.value.data()[i] = keep;
      if (!stable) {
        ++skipped;
        continue;
      }
      const double num = (hi - lo) / (2 * h);
      CHECK(std::abs(p.grad.data()[i] - num) <= 1e-6 + 1e-3 * std::abs(num));
      ++checked;
    }
  }
  CHECK(checked > 50);
  CHECK(skipped * 10 < checked);
}

TEST_CASE("node classifier keeps the input resolution") {
  Rng rng(5);
  const Graph g = erdos_renyi_graph(30, 0.15, 2, rng);
  NodeClassifier model(small_config(2, true), 2);
  const Matrix logits = model.forward(g, {});
  CHECK(logits.rows() == 30);
  CHECK(logits.cols() == 3);
  CHECK(model.last_pool_infos().size() == 2);
}

TEST_CASE("with MLP convolutions only pooling lets nodes see each other") {
  Matrix x(4, 2);
  x << 1, 0, 0, 1, 2, 0, 0, 3;
  const Graph joined = undirected(4, {{0, 1}, {2, 3}}, x);
  // Batch norm couples rows, so the control is the same rows without edges.
  const Graph apart = build_graph(4, {}, x);

  NodeClassifier pooled(small_config(2, true, ConvKind::mlp), 1);
  const Matrix a = pooled.forward(joined, {});
  REQUIRE(pooled.last_pool_infos()[0].matching.size() == 2);
  CHECK_FALSE(a.isApprox(pooled.forward(apart, {})));

  NodeClassifier plain(small_config(2, false, ConvKind::mlp), 1);
  CHECK(plain.forward(joined, {}) == plain.forward(apart, {}));
}

TEST_CASE("a graph that pools to one node still classifies") {
  Matrix x(2, 2);
  x << 1, 0, 0, 1;
  NodeClassifier model(small_config(2, true, ConvKind::mlp), 1);
  const Matrix out = model.forward(undirected(2, {{0, 1}}, x), {});
  CHECK(out.rows() == 2);
  CHECK(out.allFinite());
}

TEST_CASE("training lowers the loss and is reproducible") {
  Rng rng(6);
  GraphDataset ds;
  for (int i = 0; i < 8; ++i) {
    ds.graphs.push_back(i % 2 ? cycle_graph(6, 2, rng) : star_graph(5, 2, rng));
    ds.labels.push_back(i % 2);
  }
  ds.num_classes = 2;
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.channels = 8;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.dropout_p = 0.0;
  cfg.edge_score_dropout_p = 0.0;

  const auto eval_loss = [&](GraphClassifier& m) {
    std::vector<const Graph*> ptrs;
    for (const auto& g : ds.graphs) ptrs.push_back(&g);
    const BatchedGraph b = batch(std::span<const Graph* const>(ptrs));
    return softmax_cross_entropy(m.forward(b, {}), ds.labels).loss;
  };

  GraphClassifier model(model_config_for(cfg, 2, 2), 11);
  const double before = eval_loss(model);
  train_graph_classifier(model, ds, idx, idx, cfg);
  CHECK(eval_loss(model) < before);

  cfg.epochs = 4;
  cfg.dropout_p = 0.5;
  cfg.edge_score_dropout_p = 0.2;
  GraphClassifier m1(model_config_for(cfg, 2, 2), 11);
  GraphClassifier m2(model_config_for(cfg, 2, 2), 11);
  const History h1 = train_graph_classifier(m1, ds, idx, idx, cfg);
  const History h2 = train_graph_classifier(m2, ds, idx, idx, cfg);
  CHECK(h1.to_csv() == h2.to_csv());
  REQUIRE(h1.records.size() == 4);
  CHECK(h1.records[0].lr == cfg.learning_rate);
}

TEST_CASE("TrainConfig validation and JSON") {
  TrainConfig cfg;
  cfg.pooling = false;
  cfg.conv = ConvKind::mlp;
  cfg.seed = 77;
  const TrainConfig back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(cfg.to_json()["pooling"] == "none");

  TrainConfig bad;
  bad.dropout_p = 1.0;
  CHECK_THROWS(bad.validate());
  bad = TrainConfig{};
  bad.batch_size = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("History CSV") {
  History h;
  h.records.push_back({0, 1e-3, 0.5, 0.75});
  const std::string csv = h.to_csv();
  CHECK(csv.rfind("epoch,lr,train_loss,eval_acc\n", 0) == 0);
  CHECK(h.final_eval_acc() == 0.75);
  CHECK(History{}.final_eval_acc() == 0.0);
}
