#include "edgepool/train.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "edgepool/layers.hpp"
#include "edgepool/optim.hpp"

namespace edgepool {

using nlohmann::json;

namespace {

const char* conv_name(ConvKind kind) { return kind == ConvKind::mean ? "mean" : "mlp"; }

ConvKind parse_conv(const std::string& s) {
  if (s == "mean") return ConvKind::mean;
  if (s == "mlp") return ConvKind::mlp;
  throw std::invalid_argument("unknown conv kind '" + s + "'");
}

BatchedGraph make_batch(const GraphDataset& dataset, std::span<const std::size_t> indices) {
  std::vector<const Graph*> graphs;
  graphs.reserve(indices.size());
  for (std::size_t i : indices) graphs.push_back(&dataset.graphs.at(i));
  return batch(std::span<const Graph* const>(graphs));
}

} // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("TrainConfig: " + what); };
  if (epochs == 0) fail("epochs must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (lr_halving_period == 0) fail("lr_halving_period must be positive");
  if (channels == 0) fail("channels must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail("dropout_p must lie in [0, 1)");
  if (!(edge_score_dropout_p >= 0.0 && edge_score_dropout_p < 1.0)) fail("edge_score_dropout_p must lie in [0, 1)");
}

json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"lr_halving_period", lr_halving_period},
          {"channels", channels},
          {"dropout_p", dropout_p},
          {"edge_score_dropout_p", edge_score_dropout_p},
          {"seed", seed},
          {"pooling", pooling ? "edgepool" : "none"},
          {"conv", conv_name(conv)}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.lr_halving_period = j.value("lr_halving_period", c.lr_halving_period);
  c.channels = j.value("channels", c.channels);
  c.dropout_p = j.value("dropout_p", c.dropout_p);
  c.edge_score_dropout_p = j.value("edge_score_dropout_p", c.edge_score_dropout_p);
  c.seed = j.value("seed", c.seed);
  c.pooling = j.value("pooling", std::string("edgepool")) == "edgepool";
  c.conv = parse_conv(j.value("conv", std::string("mean")));
  c.validate();
  return c;
}

ModelConfig model_config_for(const TrainConfig& config, std::size_t in_features, std::size_t num_classes) {
  ModelConfig m;
  m.in_features = in_features;
  m.channels = config.channels;
  m.num_classes = num_classes;
  m.pooling = config.pooling;
  m.conv = config.conv;
  m.fc_dropout = config.dropout_p;
  m.edge_score_dropout = config.edge_score_dropout_p;
  return m;
}

std::string History::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,lr,train_loss,eval_acc\n";
  for (const EpochRecord& r : records) os << r.epoch << ',' << r.lr << ',' << r.train_loss << ',' << r.eval_acc << '\n';
  return os.str();
}

void History::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv();
}

double evaluate_graph_classifier(GraphClassifier& model, const GraphDataset& dataset,
                                 std::span<const std::size_t> indices, std::size_t batch_size) {
  if (indices.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto chunk = indices.subspan(start, std::min(batch_size, indices.size() - start));
    const BatchedGraph b = make_batch(dataset, chunk);
    const std::vector<int> pred = argmax_rows(model.forward(b, ForwardOptions{false, 0}));
    for (std::size_t k = 0; k < chunk.size(); ++k) correct += pred[k] == dataset.labels[chunk[k]] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

History train_graph_classifier(GraphClassifier& model, const GraphDataset& dataset,
                               std::span<const std::size_t> train_indices, std::span<const std::size_t> eval_indices,
                               const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_indices.empty()) throw std::invalid_argument("train_graph_classifier: empty training set");

  History history;
  std::vector<std::size_t> order(train_indices.begin(), train_indices.end());
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = step_decay_lr(config.learning_rate, epoch, config.lr_halving_period);
    Rng shuffle_rng = make_rng(config.seed, "epoch-shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const auto chunk = std::span<const std::size_t>(order).subspan(
          start, std::min(config.batch_size, order.size() - start));
      const BatchedGraph b = make_batch(dataset, chunk);
      std::vector<int> labels;
      labels.reserve(chunk.size());
      for (std::size_t i : chunk) labels.push_back(dataset.labels[i]);

      const std::uint64_t forward_seed = derive_seed(derive_seed(config.seed, "forward", epoch), "batch", batch_index);
      model.params().zero_grad();
      const Matrix logits = model.forward(b, ForwardOptions{true, forward_seed});
      LossAndGrad lg = softmax_cross_entropy(logits, labels);
      model.backward(lg.grad);
      adam_step(model.params(), lr, ++step);
      loss_sum += lg.loss * static_cast<double>(chunk.size());
    }

    EpochRecord rec{epoch, lr, loss_sum / static_cast<double>(order.size()),
                    evaluate_graph_classifier(model, dataset, eval_indices, config.batch_size)};
    history.records.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

double evaluate_node_classifier(NodeClassifier& model, const NodeTask& task) {
  const std::vector<std::size_t> test = task.test_nodes();
  if (test.empty()) return 0.0;
  const std::vector<int> pred = argmax_rows(model.forward(task.graph, ForwardOptions{false, 0}));
  std::size_t correct = 0;
  for (std::size_t i : test) correct += pred[i] == task.node_labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

History train_node_classifier(NodeClassifier& model, const NodeTask& task, const TrainConfig& config,
                              const EpochCallback& on_epoch) {
  config.validate();
  const std::vector<std::size_t> train = task.train_nodes();
  if (train.empty()) throw std::invalid_argument("train_node_classifier: no training nodes");
  std::vector<int> labels;
  labels.reserve(train.size());
  for (std::size_t i : train) labels.push_back(task.node_labels[i]);

  History history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = step_decay_lr(config.learning_rate, epoch, config.lr_halving_period);
    model.params().zero_grad();
    const Matrix logits = model.forward(task.graph, ForwardOptions{true, derive_seed(config.seed, "forward", epoch)});
    Matrix selected(static_cast<Eigen::Index>(train.size()), logits.cols());
    for (std::size_t k = 0; k < train.size(); ++k) {
      selected.row(static_cast<Eigen::Index>(k)) = logits.row(static_cast<Eigen::Index>(train[k]));
    }
    LossAndGrad lg = softmax_cross_entropy(selected, labels);
    Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
    for (std::size_t k = 0; k < train.size(); ++k) {
      grad.row(static_cast<Eigen::Index>(train[k])) = lg.grad.row(static_cast<Eigen::Index>(k));
    }
    model.backward(grad);
    adam_step(model.params(), lr, epoch + 1);

    EpochRecord rec{epoch, lr, lg.loss, evaluate_node_classifier(model, task)};
    history.records.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

} // namespace edgepool
