#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "edgepool/graph.hpp"
#include "edgepool/rng.hpp"

namespace edgepool {

/// Graph classification dataset; labels are remapped to 0..num_classes-1.
struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return graphs.size(); }
  std::size_t feature_width() const { return graphs.empty() ? 0 : graphs.front().feature_width(); }
  /// Throws if labels are missing or out of range.
  void validate() const;
};

/// Semi-supervised node classification task on one graph.
struct NodeTask {
  Graph graph;
  std::vector<int> node_labels;
  std::vector<std::uint8_t> train_mask;
  std::vector<std::uint8_t> test_mask;
  std::size_t num_classes = 0;

  std::vector<std::size_t> train_nodes() const;
  std::vector<std::size_t> test_nodes() const;
};

class DatasetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// TU benchmark format ------------------------------------------------------

/// Reads `{name}_A.txt`, `{name}_graph_indicator.txt`, `{name}_graph_labels.txt`
/// and, when present, `{name}_node_labels.txt` / `{name}_node_attributes.txt`.
/// Node features are the attributes followed by a one-hot of the node label;
/// when neither file exists every node gets the constant feature 1.0. Edges
/// are symmetrized and deduplicated; self-loops are dropped.
GraphDataset load_tu(const std::filesystem::path& dir, const std::string& name);

/// Writes graphs, labels and node features (as `_node_attributes.txt`).
void write_tu(const GraphDataset& dataset, const std::filesystem::path& dir, const std::string& name);

// Splits -------------------------------------------------------------------

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then k contiguous test folds whose sizes differ by at most 1
/// (larger folds first).
std::vector<Fold> kfold_splits(std::size_t count, std::size_t k, std::uint64_t seed);

/// Samples `per_class_train` training and `per_class_test` test nodes per class
/// without replacement; the rest stay unlabelled. Negative labels mean
/// "unlabelled" and are never sampled.
NodeTask node_split(Graph graph, std::vector<int> node_labels, std::size_t per_class_train,
                    std::size_t per_class_test, std::uint64_t seed);

/// Index arrays as JSON, for split files.
void write_index_json(const std::filesystem::path& path, std::span<const std::size_t> indices);
std::vector<std::size_t> read_index_json(const std::filesystem::path& path);

// Synthetic data -----------------------------------------------------------

enum class SyntheticKind { erdos_renyi, sbm_node_task, path_proteinlike, cycle, star };

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

struct SyntheticParams {
  std::size_t num_nodes = 100;
  /// Edge probability (erdos_renyi).
  double edge_probability = 0.05;
  /// Graphs per dataset for the graph kinds.
  std::size_t num_graphs = 1;
  std::size_t feature_width = 1;

  // sbm_node_task
  std::size_t blocks = 2;
  double p_in = 0.2;
  double p_out = 0.01;
  /// Standard deviation of Gaussian noise added to the one-hot block feature.
  double feature_noise = 1.0;
  std::size_t per_class_train = 20;
  std::size_t per_class_test = 30;
};

/// Symmetric, loop-free generators with Gaussian node features of the given width.
Graph erdos_renyi_graph(std::size_t n, double p, std::size_t feature_width, Rng& rng);
Graph cycle_graph(std::size_t n, std::size_t feature_width, Rng& rng);
Graph star_graph(std::size_t leaves, std::size_t feature_width, Rng& rng);
Graph path_graph(std::size_t n, std::size_t feature_width, Rng& rng);
/// Uniformly sampled simple graph with exactly `undirected_edges` edges
/// (2x that many directed edges). Suited to large sizes.
Graph random_sparse_graph(std::size_t n, std::size_t undirected_edges, std::size_t feature_width, Rng& rng);

/// erdos_renyi/cycle/star/path_proteinlike yield a GraphDataset; sbm_node_task
/// a NodeTask. path_proteinlike graphs are paths with random chords, labelled
/// by whether the chord density is above the dataset median.
std::variant<GraphDataset, NodeTask> gen_synthetic(SyntheticKind kind, const SyntheticParams& params,
                                                   std::uint64_t seed);

} // namespace edgepool
