#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "edgepool/graph.hpp"
#include "edgepool/matrix.hpp"
#include "edgepool/rng.hpp"

namespace edgepool {

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Dense: y = x W + b, with b a 1 x out row.

Matrix dense_forward(const Matrix& x, const Matrix& weight, const Matrix& bias);

struct DenseGrads {
  Matrix x;
  Matrix weight;
  Matrix bias;
};
DenseGrads dense_backward(const Matrix& x, const Matrix& weight, const Matrix& grad_y);

// Mean-aggregation graph convolution:
//   y_i = x_i W_self + mean_{k in N_in(i)} x_k W_neigh + b
// Nodes without in-neighbours get a zero neighbour term. Passing no W_neigh
// gives the node-independent (MLP) variant.

/// Row i = mean of x over in_neighbors(i), zero when there are none.
Matrix neighbor_mean(const Graph& graph, const Matrix& x);
/// Adjoint of neighbor_mean.
Matrix neighbor_mean_adjoint(const Graph& graph, const Matrix& grad);

Matrix mean_conv_forward(const Graph& graph, const Matrix& x, const Matrix& w_self, const Matrix* w_neigh,
                         const Matrix& bias);

struct MeanConvGrads {
  Matrix x;
  Matrix w_self;
  Matrix w_neigh;  // empty for the MLP variant
  Matrix bias;
};
MeanConvGrads mean_conv_backward(const Graph& graph, const Matrix& x, const Matrix& w_self, const Matrix* w_neigh,
                                 const Matrix& grad_y);

// Batch normalization with current-batch statistics, always (no running
// averages, identical in training and evaluation).

inline constexpr double kBatchNormEpsilon = 1e-5;

struct BatchNormCache {
  Matrix normalized;
  RowVector inv_std;
};

Matrix batch_norm_forward(const Matrix& x, const Matrix& gamma, const Matrix& beta, BatchNormCache& cache,
                          double epsilon = kBatchNormEpsilon);

struct BatchNormGrads {
  Matrix x;
  Matrix gamma;
  Matrix beta;
};
BatchNormGrads batch_norm_backward(const Matrix& gamma, const BatchNormCache& cache, const Matrix& grad_y);

Matrix relu_forward(const Matrix& x);
/// `y` is the relu output.
Matrix relu_backward(const Matrix& y, const Matrix& grad_y);

/// Inverted dropout. The returned mask already carries the 1/(1-p) scale;
/// empty when p == 0.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng);

// Readout.

/// Row g = mean of x over nodes with graph_id == g.
Matrix global_mean_pool(std::span<const std::uint32_t> graph_id, std::size_t num_graphs, const Matrix& x);
Matrix global_mean_pool(const BatchedGraph& batched, const Matrix& x);
Matrix global_mean_pool_backward(std::span<const std::uint32_t> graph_id, std::size_t num_graphs,
                                 const Matrix& grad_out);

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

/// Mean over rows of -log softmax(logits)[label].
LossAndGrad softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

/// Index of the largest logit per row (first on ties).
std::vector<int> argmax_rows(const Matrix& logits);

} // namespace edgepool
