#include "edgepool/models.hpp"

#include "edgepool/unpool.hpp"

namespace edgepool {

namespace detail {

namespace {

Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

} // namespace

ConvBlock::ConvBlock(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, ConvKind kind,
                     Rng& rng) {
  w_self_ = &store.add_glorot(prefix + ".w_self", as_index(in), as_index(out), rng);
  if (kind == ConvKind::mean) w_neigh_ = &store.add_glorot(prefix + ".w_neigh", as_index(in), as_index(out), rng);
  bias_ = &store.add(prefix + ".bias", 1, as_index(out));
  gamma_ = &store.add(prefix + ".bn_gamma", 1, as_index(out));
  gamma_->value.setOnes();
  beta_ = &store.add(prefix + ".bn_beta", 1, as_index(out));
}

Matrix ConvBlock::forward(const Graph& graph, const Matrix& x, double dropout_p, Rng& rng,
                          ConvBlockTape& tape) const {
  tape.input = x;
  const Matrix conv = mean_conv_forward(graph, x, w_self_->value, w_neigh_ ? &w_neigh_->value : nullptr,
                                        bias_->value);
  tape.activated = relu_forward(batch_norm_forward(conv, gamma_->value, beta_->value, tape.bn));
  tape.mask = dropout_mask(tape.activated.rows(), tape.activated.cols(), dropout_p, rng);
  tape.output = tape.mask.size() ? Matrix(tape.activated.cwiseProduct(tape.mask)) : tape.activated;
  return tape.output;
}

Matrix ConvBlock::backward(const Graph& graph, const ConvBlockTape& tape, const Matrix& grad_out) const {
  Matrix g = tape.mask.size() ? Matrix(grad_out.cwiseProduct(tape.mask)) : grad_out;
  g = relu_backward(tape.activated, g);
  BatchNormGrads bn = batch_norm_backward(gamma_->value, tape.bn, g);
  gamma_->grad += bn.gamma;
  beta_->grad += bn.beta;
  MeanConvGrads conv = mean_conv_backward(graph, tape.input, w_self_->value,
                                          w_neigh_ ? &w_neigh_->value : nullptr, bn.x);
  w_self_->grad += conv.w_self;
  if (w_neigh_) w_neigh_->grad += conv.w_neigh;
  bias_->grad += conv.bias;
  return std::move(conv.x);
}

PoolLayer::PoolLayer(ParamStore& store, const std::string& prefix, std::size_t width, Rng& rng) {
  weight_ = &store.add_glorot(prefix + ".score_weight", 1, as_index(PoolParams::weight_length(width)), rng);
  bias_ = &store.add(prefix + ".score_bias", 1, 1);
}

PoolParams PoolLayer::params() const { return {weight_->value.row(0).transpose(), bias_->value(0, 0)}; }

PoolResult PoolLayer::forward(const Graph& graph, const Matrix& x, const PoolOptions& options) const {
  return edgepool_forward(graph, x, params(), options);
}

Matrix PoolLayer::backward(const Graph& graph, const Matrix& x, const PoolResult& result, const Matrix& grad_pooled,
                           std::span<const double> score_grad) const {
  PoolGradients g =
      edgepool_backward(graph, x, params(), result.info, result.scores, grad_pooled, PoolOptions{}, score_grad);
  weight_->grad.row(0) += g.weight.transpose();
  bias_->grad(0, 0) += g.bias;
  return std::move(g.node_features);
}

} // namespace detail

namespace {

Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

PoolOptions pool_options(const ModelConfig& config, const ForwardOptions& options, std::size_t level) {
  PoolOptions po;
  po.training = options.training;
  po.dropout_p = options.training ? config.edge_score_dropout : 0.0;
  po.seed = derive_seed(options.seed, "edge-score-dropout", level);
  return po;
}

} // namespace

// ---------------------------------------------------------------------------
// GraphClassifier

GraphClassifier::GraphClassifier(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  Rng rng = make_rng(seed, "graph-classifier-init");
  const std::size_t c = config.channels;
  for (std::size_t k = 0; k < kBlocks; ++k) {
    const std::string prefix = "block" + std::to_string(k);
    blocks_[k] = detail::ConvBlock(params_, prefix, k == 0 ? config.in_features : c, c, config.conv, rng);
    if (config.pooling) pools_[k] = detail::PoolLayer(params_, "pool" + std::to_string(k), c, rng);
  }
  fc1_w_ = &params_.add_glorot("fc1.weight", as_index(kBlocks * c), as_index(c), rng);
  fc1_b_ = &params_.add("fc1.bias", 1, as_index(c));
  fc2_w_ = &params_.add_glorot("fc2.weight", as_index(c), as_index(config.num_classes), rng);
  fc2_b_ = &params_.add("fc2.bias", 1, as_index(config.num_classes));
}

Matrix GraphClassifier::forward(const BatchedGraph& batch, const ForwardOptions& options) {
  Rng rng = make_rng(options.seed, "graph-classifier-dropout");
  const std::size_t c = config_.channels;
  num_graphs_ = batch.num_graphs;
  readout_.resize(as_index(num_graphs_), as_index(kBlocks * c));

  const Graph* graph = &batch.graph;
  std::vector<std::uint32_t> ids = batch.graph_id;
  Matrix x = batch.graph.node_features();
  for (std::size_t k = 0; k < kBlocks; ++k) {
    BlockTape& tape = tape_[k];
    tape.graph = graph;
    tape.pool.reset();
    blocks_[k].forward(*graph, x, options.training ? config_.conv_dropout : 0.0, rng, tape.conv);
    if (config_.pooling) {
      tape.pool = pools_[k].forward(*graph, tape.conv.output, pool_options(config_, options, k));
      ids = pool_graph_ids(ids, tape.pool->info);
      graph = &tape.pool->pooled;
      x = tape.pool->pooled.node_features();
    } else {
      x = tape.conv.output;
    }
    tape.readout_ids = ids;
    readout_.middleCols(as_index(k * c), as_index(c)) = global_mean_pool(ids, num_graphs_, x);
  }

  hidden_ = relu_forward(dense_forward(readout_, fc1_w_->value, fc1_b_->value));
  hidden_mask_ = dropout_mask(hidden_.rows(), hidden_.cols(), options.training ? config_.fc_dropout : 0.0, rng);
  hidden_dropped_ = hidden_mask_.size() ? Matrix(hidden_.cwiseProduct(hidden_mask_)) : hidden_;
  return dense_forward(hidden_dropped_, fc2_w_->value, fc2_b_->value);
}

void GraphClassifier::backward(const Matrix& grad_logits) {
  const std::size_t c = config_.channels;
  DenseGrads d2 = dense_backward(hidden_dropped_, fc2_w_->value, grad_logits);
  fc2_w_->grad += d2.weight;
  fc2_b_->grad += d2.bias;
  Matrix g = hidden_mask_.size() ? Matrix(d2.x.cwiseProduct(hidden_mask_)) : d2.x;
  g = relu_backward(hidden_, g);
  DenseGrads d1 = dense_backward(readout_, fc1_w_->value, g);
  fc1_w_->grad += d1.weight;
  fc1_b_->grad += d1.bias;

  Matrix carry;
  for (std::size_t k = kBlocks; k-- > 0;) {
    const BlockTape& tape = tape_[k];
    Matrix grad_x =
        global_mean_pool_backward(tape.readout_ids, num_graphs_, d1.x.middleCols(as_index(k * c), as_index(c)));
    if (carry.size()) grad_x += carry;
    Matrix grad_h = config_.pooling ? pools_[k].backward(*tape.graph, tape.conv.output, *tape.pool, grad_x)
                                    : std::move(grad_x);
    carry = blocks_[k].backward(*tape.graph, tape.conv, grad_h);
  }
}

std::vector<PoolInfo> GraphClassifier::last_pool_infos() const {
  std::vector<PoolInfo> out;
  for (const BlockTape& t : tape_) {
    if (t.pool) out.push_back(t.pool->info);
  }
  return out;
}

// ---------------------------------------------------------------------------
// NodeClassifier

NodeClassifier::NodeClassifier(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  Rng rng = make_rng(seed, "node-classifier-init");
  const std::size_t c = config.channels;
  // Blocks 0-4 are C wide; block 5 reads [unpooled, skip] (2C).
  const std::array<std::size_t, kBlocks> in_width{config.in_features, c, c, c, c, 2 * c, c};
  for (std::size_t k = 0; k < kBlocks; ++k) {
    blocks_[k] = detail::ConvBlock(params_, "block" + std::to_string(k), in_width[k], c, config.conv, rng);
  }
  if (config.pooling) {
    pools_[0] = detail::PoolLayer(params_, "pool0", c, rng);
    pools_[1] = detail::PoolLayer(params_, "pool1", c, rng);
  }
  fc1_w_ = &params_.add_glorot("fc1.weight", as_index(2 * c), as_index(c), rng);
  fc1_b_ = &params_.add("fc1.bias", 1, as_index(c));
  fc2_w_ = &params_.add_glorot("fc2.weight", as_index(c), as_index(config.num_classes), rng);
  fc2_b_ = &params_.add("fc2.bias", 1, as_index(config.num_classes));
}

Matrix NodeClassifier::forward(const Graph& graph, const ForwardOptions& options) {
  Rng rng = make_rng(options.seed, "node-classifier-dropout");
  const double p = options.training ? config_.conv_dropout : 0.0;
  auto block = [&](std::size_t k, const Graph& g, const Matrix& x) {
    return blocks_[k].forward(g, x, p, rng, conv_tape_[k]);
  };

  graphs_[0] = &graph;
  pool_tape_[0].reset();
  pool_tape_[1].reset();

  Matrix h = block(0, graph, graph.node_features());
  h = block(1, graph, h);
  skip_[0] = h;
  if (config_.pooling) {
    pool_tape_[0] = pools_[0].forward(graph, h, pool_options(config_, options, 0));
    graphs_[1] = &pool_tape_[0]->pooled;
    h = pool_tape_[0]->pooled.node_features();
  } else {
    graphs_[1] = &graph;
  }

  h = block(2, *graphs_[1], h);
  h = block(3, *graphs_[1], h);
  skip_[1] = h;
  if (config_.pooling) {
    pool_tape_[1] = pools_[1].forward(*graphs_[1], h, pool_options(config_, options, 1));
    graphs_[2] = &pool_tape_[1]->pooled;
    h = pool_tape_[1]->pooled.node_features();
  } else {
    graphs_[2] = graphs_[1];
  }

  h = block(4, *graphs_[2], h);
  unpool_input_[1] = h;
  if (config_.pooling) h = unpool_once(h, pool_tape_[1]->info);
  h = block(5, *graphs_[1], hcat(h, skip_[1]));
  h = block(6, *graphs_[1], h);
  unpool_input_[0] = h;
  if (config_.pooling) h = unpool_once(h, pool_tape_[0]->info);
  head_input_ = hcat(h, skip_[0]);

  hidden_ = relu_forward(dense_forward(head_input_, fc1_w_->value, fc1_b_->value));
  hidden_mask_ = dropout_mask(hidden_.rows(), hidden_.cols(), options.training ? config_.fc_dropout : 0.0, rng);
  hidden_dropped_ = hidden_mask_.size() ? Matrix(hidden_.cwiseProduct(hidden_mask_)) : hidden_;
  return dense_forward(hidden_dropped_, fc2_w_->value, fc2_b_->value);
}

void NodeClassifier::backward(const Matrix& grad_logits) {
  const Eigen::Index c = as_index(config_.channels);
  DenseGrads d2 = dense_backward(hidden_dropped_, fc2_w_->value, grad_logits);
  fc2_w_->grad += d2.weight;
  fc2_b_->grad += d2.bias;
  Matrix g = hidden_mask_.size() ? Matrix(d2.x.cwiseProduct(hidden_mask_)) : d2.x;
  g = relu_backward(hidden_, g);
  DenseGrads d1 = dense_backward(head_input_, fc1_w_->value, g);
  fc1_w_->grad += d1.weight;
  fc1_b_->grad += d1.bias;

  const Matrix grad_skip0 = d1.x.rightCols(c);
  Matrix grad = d1.x.leftCols(c);
  std::vector<double> score_grad0;
  if (config_.pooling) {
    score_grad0 = unpool_score_gradient(grad, unpool_input_[0], pool_tape_[0]->info);
    grad = unpool_backward(grad, pool_tape_[0]->info);
  }
  grad = blocks_[6].backward(*graphs_[1], conv_tape_[6], grad);
  grad = blocks_[5].backward(*graphs_[1], conv_tape_[5], grad);

  const Matrix grad_skip1 = grad.rightCols(c);
  grad = Matrix(grad.leftCols(c));
  std::vector<double> score_grad1;
  if (config_.pooling) {
    score_grad1 = unpool_score_gradient(grad, unpool_input_[1], pool_tape_[1]->info);
    grad = unpool_backward(grad, pool_tape_[1]->info);
  }
  grad = blocks_[4].backward(*graphs_[2], conv_tape_[4], grad);
  if (config_.pooling) grad = pools_[1].backward(*graphs_[1], skip_[1], *pool_tape_[1], grad, score_grad1);
  grad += grad_skip1;

  grad = blocks_[3].backward(*graphs_[1], conv_tape_[3], grad);
  grad = blocks_[2].backward(*graphs_[1], conv_tape_[2], grad);
  if (config_.pooling) grad = pools_[0].backward(*graphs_[0], skip_[0], *pool_tape_[0], grad, score_grad0);
  grad += grad_skip0;

  grad = blocks_[1].backward(*graphs_[0], conv_tape_[1], grad);
  blocks_[0].backward(*graphs_[0], conv_tape_[0], grad);
}

std::vector<PoolInfo> NodeClassifier::last_pool_infos() const {
  std::vector<PoolInfo> out;
  for (const auto& t : pool_tape_) {
    if (t) out.push_back(t->info);
  }
  return out;
}

} // namespace edgepool
