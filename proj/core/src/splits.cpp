#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "edgepool/dataset.hpp"

namespace edgepool {

std::vector<std::size_t> NodeTask::train_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < train_mask.size(); ++i) {
    if (train_mask[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> NodeTask::test_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < test_mask.size(); ++i) {
    if (test_mask[i]) out.push_back(i);
  }
  return out;
}

std::vector<Fold> kfold_splits(std::size_t count, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > count) {
    throw std::invalid_argument("kfold: k=" + std::to_string(k) + " must lie in 1.." + std::to_string(count));
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, "kfold");
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Fold> folds(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = count / k + (f < count % k ? 1 : 0);
    folds[f].test.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + size));
    std::sort(folds[f].test.begin(), folds[f].test.end());
    start += size;
  }
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

NodeTask node_split(Graph graph, std::vector<int> node_labels, std::size_t per_class_train,
                    std::size_t per_class_test, std::uint64_t seed) {
  if (node_labels.size() != graph.num_nodes()) throw DatasetError("node_split: one label per node required");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < node_labels.size(); ++i) {
    if (node_labels[i] >= 0) by_class[node_labels[i]].push_back(i);
  }
  NodeTask task;
  task.train_mask.assign(graph.num_nodes(), 0);
  task.test_mask.assign(graph.num_nodes(), 0);
  Rng rng = make_rng(seed, "node-split");
  int max_label = -1;
  for (auto& [label, nodes] : by_class) {
    if (nodes.size() < per_class_train + per_class_test) {
      throw DatasetError("node_split: class " + std::to_string(label) + " has " + std::to_string(nodes.size()) +
                         " nodes, needs " + std::to_string(per_class_train + per_class_test));
    }
    std::shuffle(nodes.begin(), nodes.end(), rng);
    for (std::size_t k = 0; k < per_class_train; ++k) task.train_mask[nodes[k]] = 1;
    for (std::size_t k = per_class_train; k < per_class_train + per_class_test; ++k) task.test_mask[nodes[k]] = 1;
    max_label = std::max(max_label, label);
  }
  task.num_classes = static_cast<std::size_t>(max_label + 1);
  task.graph = std::move(graph);
  task.node_labels = std::move(node_labels);
  return task;
}

void write_index_json(const std::filesystem::path& path, std::span<const std::size_t> indices) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << nlohmann::json(std::vector<std::size_t>(indices.begin(), indices.end())).dump() << '\n';
}

std::vector<std::size_t> read_index_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in).get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

} // namespace edgepool
