#include "edgepool/unpool.hpp"

#include <string>

namespace edgepool {

namespace {

void check_scores(const PoolInfo& info) {
  if (info.node_score.size() != info.cluster_of.size()) throw PoolError("pool info is inconsistent");
  for (double s : info.node_score) {
    if (!(s > 0.0)) throw PoolError("non-positive gating score cannot be unpooled");
  }
}

} // namespace

Matrix unpool_once(const Matrix& pooled, const PoolInfo& info) {
  if (static_cast<std::size_t>(pooled.rows()) != info.pooled_num_nodes) {
    throw PoolError("unpool: expected " + std::to_string(info.pooled_num_nodes) + " pooled rows, got " +
                    std::to_string(pooled.rows()));
  }
  check_scores(info);
  Matrix out(static_cast<Eigen::Index>(info.input_num_nodes()), pooled.cols());
  for (std::size_t i = 0; i < info.input_num_nodes(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = pooled.row(info.cluster_of[i]) / info.node_score[i];
  }
  return out;
}

Matrix unpool_chain(const Matrix& features, const UnpoolPlan& plan) {
  for (std::size_t l = 1; l < plan.levels.size(); ++l) {
    if (plan.levels[l].input_num_nodes() != plan.levels[l - 1].pooled_num_nodes) {
      throw PoolError("unpool plan levels do not chain at level " + std::to_string(l));
    }
  }
  Matrix x = features;
  for (auto it = plan.levels.rbegin(); it != plan.levels.rend(); ++it) x = unpool_once(x, *it);
  return x;
}

Matrix unpool_backward(const Matrix& upstream, const PoolInfo& info) {
  if (static_cast<std::size_t>(upstream.rows()) != info.input_num_nodes()) {
    throw PoolError("unpool_backward: expected " + std::to_string(info.input_num_nodes()) + " rows, got " +
                    std::to_string(upstream.rows()));
  }
  check_scores(info);
  Matrix grad = Matrix::Zero(static_cast<Eigen::Index>(info.pooled_num_nodes), upstream.cols());
  for (std::size_t i = 0; i < info.input_num_nodes(); ++i) {
    grad.row(info.cluster_of[i]) += upstream.row(static_cast<Eigen::Index>(i)) / info.node_score[i];
  }
  return grad;
}

std::vector<double> unpool_score_gradient(const Matrix& upstream, const Matrix& pooled, const PoolInfo& info) {
  if (static_cast<std::size_t>(upstream.rows()) != info.input_num_nodes() ||
      static_cast<std::size_t>(pooled.rows()) != info.pooled_num_nodes || upstream.cols() != pooled.cols()) {
    throw PoolError("unpool_score_gradient: shape mismatch");
  }
  check_scores(info);
  std::vector<double> grad(info.matching.size(), 0.0);
  for (std::size_t i = 0; i < info.input_num_nodes(); ++i) {
    const NodeId c = info.cluster_of[i];
    if (c >= grad.size()) continue;
    const double s = info.node_score[i];
    grad[c] -= upstream.row(static_cast<Eigen::Index>(i)).dot(pooled.row(c)) / (s * s);
  }
  return grad;
}

Matrix unpool_chain_backward(const Matrix& upstream, const UnpoolPlan& plan) {
  Matrix g = upstream;
  for (const PoolInfo& level : plan.levels) g = unpool_backward(g, level);
  return g;
}

} // namespace edgepool
