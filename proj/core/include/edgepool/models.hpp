#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "edgepool/edgepool.hpp"
#include "edgepool/graph.hpp"
#include "edgepool/layers.hpp"
#include "edgepool/params.hpp"

namespace edgepool {

enum class ConvKind {
  mean,  ///< self + mean-of-in-neighbours transform
  mlp,   ///< self transform only; nodes only interact through pooling
};

struct ModelConfig {
  std::size_t in_features = 1;
  std::size_t channels = 64;
  std::size_t num_classes = 2;
  bool pooling = true;
  ConvKind conv = ConvKind::mean;
  double conv_dropout = 0.0;
  double fc_dropout = 0.5;
  double edge_score_dropout = 0.2;
};

struct ForwardOptions {
  bool training = false;
  /// Seeds feature dropout and edge-score dropout for this call.
  std::uint64_t seed = 0;
};

namespace detail {

struct ConvBlockTape {
  Matrix input;
  Matrix activated;
  Matrix mask;
  Matrix output;
  BatchNormCache bn;
};

/// conv -> batch norm -> relu -> dropout.
class ConvBlock {
public:
  ConvBlock() = default;
  ConvBlock(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, ConvKind kind, Rng& rng);

  Matrix forward(const Graph& graph, const Matrix& x, double dropout_p, Rng& rng, ConvBlockTape& tape) const;
  /// Accumulates parameter gradients and returns dLoss/dx.
  Matrix backward(const Graph& graph, const ConvBlockTape& tape, const Matrix& grad_out) const;

private:
  Parameter* w_self_ = nullptr;
  Parameter* w_neigh_ = nullptr;
  Parameter* bias_ = nullptr;
  Parameter* gamma_ = nullptr;
  Parameter* beta_ = nullptr;
};

/// EdgePool with its score parameters held in a ParamStore.
class PoolLayer {
public:
  PoolLayer() = default;
  PoolLayer(ParamStore& store, const std::string& prefix, std::size_t width, Rng& rng);

  PoolParams params() const;
  PoolResult forward(const Graph& graph, const Matrix& x, const PoolOptions& options) const;
  Matrix backward(const Graph& graph, const Matrix& x, const PoolResult& result, const Matrix& grad_pooled,
                  std::span<const double> score_grad = {}) const;

private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
};

} // namespace detail

/// Graph classifier: three conv blocks, an EdgePool layer after each (when
/// pooling is enabled), a global mean readout of each block's (pooled) node
/// set, the three readouts concatenated, then two dense layers.
///
/// forward() keeps a tape for backward(); the batch passed to forward() must
/// outlive the following backward() call.
class GraphClassifier {
public:
  static constexpr std::size_t kBlocks = 3;

  GraphClassifier(const ModelConfig& config, std::uint64_t seed);
  GraphClassifier(const GraphClassifier&) = delete;
  GraphClassifier& operator=(const GraphClassifier&) = delete;
  GraphClassifier(GraphClassifier&&) = default;

  Matrix forward(const BatchedGraph& batch, const ForwardOptions& options);
  void backward(const Matrix& grad_logits);

  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  const ModelConfig& config() const noexcept { return config_; }

  /// Pooling levels produced by the last forward call.
  std::vector<PoolInfo> last_pool_infos() const;

private:
  struct BlockTape {
    const Graph* graph = nullptr;
    detail::ConvBlockTape conv;
    std::optional<PoolResult> pool;
    std::vector<std::uint32_t> readout_ids;
  };

  ModelConfig config_;
  ParamStore params_;
  std::array<detail::ConvBlock, kBlocks> blocks_;
  std::array<detail::PoolLayer, kBlocks> pools_;
  Parameter* fc1_w_ = nullptr;
  Parameter* fc1_b_ = nullptr;
  Parameter* fc2_w_ = nullptr;
  Parameter* fc2_b_ = nullptr;

  std::size_t num_graphs_ = 0;
  std::array<BlockTape, kBlocks> tape_;
  Matrix readout_;
  Matrix hidden_;
  Matrix hidden_mask_;
  Matrix hidden_dropped_;
};

/// Node classifier: seven conv blocks; EdgePool after blocks 2 and 4, unpool
/// after blocks 5 and 7 (the second pool is undone first). Each unpooled
/// activation is concatenated with the activation that entered the matching
/// pool; a two-layer per-node head produces logits.
class NodeClassifier {
public:
  static constexpr std::size_t kBlocks = 7;

  NodeClassifier(const ModelConfig& config, std::uint64_t seed);
  NodeClassifier(const NodeClassifier&) = delete;
  NodeClassifier& operator=(const NodeClassifier&) = delete;
  NodeClassifier(NodeClassifier&&) = default;

  Matrix forward(const Graph& graph, const ForwardOptions& options);
  void backward(const Matrix& grad_logits);

  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  const ModelConfig& config() const noexcept { return config_; }

  std::vector<PoolInfo> last_pool_infos() const;

private:
  ModelConfig config_;
  ParamStore params_;
  std::array<detail::ConvBlock, kBlocks> blocks_;
  std::array<detail::PoolLayer, 2> pools_;
  Parameter* fc1_w_ = nullptr;
  Parameter* fc1_b_ = nullptr;
  Parameter* fc2_w_ = nullptr;
  Parameter* fc2_b_ = nullptr;

  // Tape.
  std::array<const Graph*, 3> graphs_{};
  std::array<detail::ConvBlockTape, kBlocks> conv_tape_;
  std::array<std::optional<PoolResult>, 2> pool_tape_;
  std::array<Matrix, 2> skip_;         // activation entering each pool
  std::array<Matrix, 2> unpool_input_; // pooled-resolution input of each unpool
  Matrix head_input_;
  Matrix hidden_;
  Matrix hidden_mask_;
  Matrix hidden_dropped_;
};

} // namespace edgepool
