#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgepool/dataset.hpp"
#include "edgepool/models.hpp"

namespace edgepool {

/// Training recipe. Defaults follow the reference setup: Adam at 1e-3 halved
/// every 50 epochs for 200 epochs, 128 graphs per batch, edge-score dropout 0.2.
struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::size_t lr_halving_period = 50;
  std::size_t channels = 64;
  /// Feature dropout on the hidden dense layer.
  double dropout_p = 0.5;
  double edge_score_dropout_p = 0.2;
  std::uint64_t seed = 0;
  bool pooling = true;
  ConvKind conv = ConvKind::mean;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

ModelConfig model_config_for(const TrainConfig& config, std::size_t in_features, std::size_t num_classes);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double eval_acc = 0.0;
};

struct History {
  std::vector<EpochRecord> records;

  /// Header `epoch,lr,train_loss,eval_acc`.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  double final_eval_acc() const { return records.empty() ? 0.0 : records.back().eval_acc; }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

History train_graph_classifier(GraphClassifier& model, const GraphDataset& dataset,
                               std::span<const std::size_t> train_indices, std::span<const std::size_t> eval_indices,
                               const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Accuracy over `indices`, evaluated in batches of `batch_size` (batch-norm
/// statistics come from each evaluation batch).
double evaluate_graph_classifier(GraphClassifier& model, const GraphDataset& dataset,
                                 std::span<const std::size_t> indices, std::size_t batch_size);

/// Full-graph training on the task's train mask; eval accuracy on the test mask.
History train_node_classifier(NodeClassifier& model, const NodeTask& task, const TrainConfig& config,
                              const EpochCallback& on_epoch = {});

double evaluate_node_classifier(NodeClassifier& model, const NodeTask& task);

} // namespace edgepool
