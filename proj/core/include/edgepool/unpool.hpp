#pragma once

#include <span>
#include <vector>

#include "edgepool/edgepool.hpp"
#include "edgepool/matrix.hpp"

namespace edgepool {

/// Pooling levels, first-applied level first.
struct UnpoolPlan {
  std::vector<PoolInfo> levels;
};

/// Each original node i receives pooled[cluster_of[i]] / node_score[i]; both
/// members of a merged pair get the same row.
Matrix unpool_once(const Matrix& pooled, const PoolInfo& info);

/// Applies unpool_once from the last level back to the first.
Matrix unpool_chain(const Matrix& features, const UnpoolPlan& plan);

/// Adjoint of unpool_once: grad[c] = sum over i in cluster c of upstream[i] / node_score[i].
Matrix unpool_backward(const Matrix& upstream, const PoolInfo& info);

/// dLoss/d(gating score) of each matching entry through the division in
/// unpool_once, given the forward input `pooled`.
std::vector<double> unpool_score_gradient(const Matrix& upstream, const Matrix& pooled, const PoolInfo& info);

Matrix unpool_chain_backward(const Matrix& upstream, const UnpoolPlan& plan);

} // namespace edgepool
