#include "edgepool/layers.hpp"

#include <cmath>
#include <random>
#include <string>

namespace edgepool {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

} // namespace

Matrix dense_forward(const Matrix& x, const Matrix& weight, const Matrix& bias) {
  require(x.cols() == weight.rows(), "dense: input width does not match weight rows");
  require(bias.rows() == 1 && bias.cols() == weight.cols(), "dense: bias must be 1 x out");
  Matrix y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

DenseGrads dense_backward(const Matrix& x, const Matrix& weight, const Matrix& grad_y) {
  require(grad_y.rows() == x.rows() && grad_y.cols() == weight.cols(), "dense: gradient shape mismatch");
  return {grad_y * weight.transpose(), x.transpose() * grad_y, grad_y.colwise().sum()};
}

Matrix neighbor_mean(const Graph& graph, const Matrix& x) {
  require(static_cast<std::size_t>(x.rows()) == graph.num_nodes(), "mean_conv: feature rows != node count");
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const auto in = graph.in_edges(i);
    if (in.empty()) continue;
    auto row = out.row(i);
    for (std::size_t e : in) row += x.row(graph.edge(e).src);
    row /= static_cast<double>(in.size());
  }
  return out;
}

Matrix neighbor_mean_adjoint(const Graph& graph, const Matrix& grad) {
  require(static_cast<std::size_t>(grad.rows()) == graph.num_nodes(), "mean_conv: gradient rows != node count");
  Matrix out = Matrix::Zero(grad.rows(), grad.cols());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const auto in = graph.in_edges(i);
    if (in.empty()) continue;
    const double scale = 1.0 / static_cast<double>(in.size());
    for (std::size_t e : in) out.row(graph.edge(e).src) += scale * grad.row(i);
  }
  return out;
}

Matrix mean_conv_forward(const Graph& graph, const Matrix& x, const Matrix& w_self, const Matrix* w_neigh,
                         const Matrix& bias) {
  require(x.cols() == w_self.rows(), "mean_conv: input width does not match W_self");
  require(bias.rows() == 1 && bias.cols() == w_self.cols(), "mean_conv: bias must be 1 x out");
  Matrix y = x * w_self;
  if (w_neigh) {
    require(w_neigh->rows() == w_self.rows() && w_neigh->cols() == w_self.cols(),
            "mean_conv: W_neigh shape differs from W_self");
    y.noalias() += neighbor_mean(graph, x) * *w_neigh;
  } else {
    require(static_cast<std::size_t>(x.rows()) == graph.num_nodes(), "mean_conv: feature rows != node count");
  }
  y.rowwise() += bias.row(0);
  return y;
}

MeanConvGrads mean_conv_backward(const Graph& graph, const Matrix& x, const Matrix& w_self, const Matrix* w_neigh,
                                 const Matrix& grad_y) {
  require(grad_y.rows() == x.rows() && grad_y.cols() == w_self.cols(), "mean_conv: gradient shape mismatch");
  MeanConvGrads g;
  g.x = grad_y * w_self.transpose();
  g.w_self = x.transpose() * grad_y;
  g.bias = grad_y.colwise().sum();
  if (w_neigh) {
    g.w_neigh = neighbor_mean(graph, x).transpose() * grad_y;
    g.x += neighbor_mean_adjoint(graph, grad_y * w_neigh->transpose());
  }
  return g;
}

Matrix batch_norm_forward(const Matrix& x, const Matrix& gamma, const Matrix& beta, BatchNormCache& cache,
                          double epsilon) {
  if (x.rows() == 0) throw ShapeError("batch_norm needs at least one row");
  require(gamma.rows() == 1 && gamma.cols() == x.cols() && beta.rows() == 1 && beta.cols() == x.cols(),
          "batch_norm: gamma/beta must be 1 x width");
  const double n = static_cast<double>(x.rows());
  const RowVector mean = x.colwise().sum() / n;
  Matrix centered = x.rowwise() - mean;
  const RowVector var = centered.array().square().colwise().sum() / n;
  cache.inv_std = (var.array() + epsilon).rsqrt();
  cache.normalized = centered.array().rowwise() * cache.inv_std.array();
  Matrix y = cache.normalized.array().rowwise() * gamma.row(0).array();
  y.rowwise() += beta.row(0);
  return y;
}

BatchNormGrads batch_norm_backward(const Matrix& gamma, const BatchNormCache& cache, const Matrix& grad_y) {
  const Matrix& xhat = cache.normalized;
  require(grad_y.rows() == xhat.rows() && grad_y.cols() == xhat.cols(), "batch_norm: gradient shape mismatch");
  const double n = static_cast<double>(xhat.rows());
  BatchNormGrads g;
  g.beta = grad_y.colwise().sum();
  g.gamma = (grad_y.array() * xhat.array()).colwise().sum();
  const Matrix grad_xhat = grad_y.array().rowwise() * gamma.row(0).array();
  const RowVector sum_g = grad_xhat.colwise().sum();
  const RowVector sum_gx = (grad_xhat.array() * xhat.array()).colwise().sum();
  Matrix dx = (grad_xhat * n).rowwise() - sum_g;
  dx -= (xhat.array().rowwise() * sum_gx.array()).matrix();
  g.x = (dx.array().rowwise() * (cache.inv_std.array() / n)).matrix();
  return g;
}

Matrix relu_forward(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& y, const Matrix& grad_y) {
  return (y.array() > 0.0).select(grad_y, 0.0);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout probability must lie in [0, 1)");
  if (p == 0.0) return {};
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  Matrix mask(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = keep(rng) ? scale : 0.0;
  }
  return mask;
}

Matrix global_mean_pool(std::span<const std::uint32_t> graph_id, std::size_t num_graphs, const Matrix& x) {
  require(graph_id.size() == static_cast<std::size_t>(x.rows()), "global_mean_pool: graph_id length != rows");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(num_graphs), x.cols());
  std::vector<std::size_t> count(num_graphs, 0);
  for (std::size_t i = 0; i < graph_id.size(); ++i) {
    require(graph_id[i] < num_graphs, "global_mean_pool: graph id out of range");
    out.row(graph_id[i]) += x.row(static_cast<Eigen::Index>(i));
    ++count[graph_id[i]];
  }
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (count[g] == 0) throw ShapeError("global_mean_pool: graph " + std::to_string(g) + " has no nodes");
    out.row(static_cast<Eigen::Index>(g)) /= static_cast<double>(count[g]);
  }
  return out;
}

Matrix global_mean_pool(const BatchedGraph& batched, const Matrix& x) {
  return global_mean_pool(batched.graph_id, batched.num_graphs, x);
}

Matrix global_mean_pool_backward(std::span<const std::uint32_t> graph_id, std::size_t num_graphs,
                                 const Matrix& grad_out) {
  require(static_cast<std::size_t>(grad_out.rows()) == num_graphs, "global_mean_pool: gradient rows != graphs");
  std::vector<std::size_t> count(num_graphs, 0);
  for (std::uint32_t g : graph_id) ++count[g];
  Matrix grad(static_cast<Eigen::Index>(graph_id.size()), grad_out.cols());
  for (std::size_t i = 0; i < graph_id.size(); ++i) {
    grad.row(static_cast<Eigen::Index>(i)) = grad_out.row(graph_id[i]) / static_cast<double>(count[graph_id[i]]);
  }
  return grad;
}

LossAndGrad softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  require(static_cast<std::size_t>(logits.rows()) == labels.size(), "cross_entropy: one label per row");
  require(logits.rows() > 0, "cross_entropy: empty batch");
  const double n = static_cast<double>(logits.rows());
  LossAndGrad out;
  out.grad.resize(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 0 || label >= logits.cols()) {
      throw std::out_of_range("label " + std::to_string(label) + " outside 0.." + std::to_string(logits.cols() - 1));
    }
    const double max = logits.row(r).maxCoeff();
    const RowVector e = (logits.row(r).array() - max).exp();
    const double sum = e.sum();
    out.loss += std::log(sum) + max - logits(r, label);
    out.grad.row(r) = e / sum;
    out.grad(r, label) -= 1.0;
  }
  out.loss /= n;
  out.grad /= n;
  return out;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

} // namespace edgepool
