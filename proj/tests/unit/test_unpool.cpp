#include <doctest.h>

#include "edgepool/hierarchy.hpp"
#include "edgepool/unpool.hpp"
#include "test_support.hpp"

using namespace edgepool;
using namespace edgepool::testing;

namespace {

PoolInfo pair_info() {
  PoolInfo info;
  info.matching = {{0, 1}};
  info.matched_edges = {0};
  info.cluster_of = {0, 0, 1};
  info.node_score = {1.5, 1.5, 1.0};
  info.pooled_num_nodes = 2;
  return info;
}

PoolInfo identity_info(std::size_t n) {
  PoolInfo info;
  info.pooled_num_nodes = n;
  for (std::size_t v = 0; v < n; ++v) info.cluster_of.push_back(static_cast<NodeId>(v));
  info.node_score.assign(n, 1.0);
  return info;
}

} // namespace

TEST_CASE("unpool_once divides merged rows by the gating score") {
  const Matrix out = unpool_once(column({4.5, 7.0}), pair_info());
  CHECK(out(0, 0) == doctest::Approx(3.0));
  CHECK(out(1, 0) == doctest::Approx(3.0));
  CHECK(out(2, 0) == 7.0);

  const Matrix x = column({1, 2, 3});
  CHECK(unpool_once(x, identity_info(3)) == x);
  CHECK_THROWS(unpool_once(column({1}), pair_info()));
}

TEST_CASE("unpool_chain") {
  const Matrix x = column({1, 2, 3});
  UnpoolPlan two{{identity_info(3), identity_info(3)}};
  CHECK(unpool_chain(x, two) == x);

  UnpoolPlan one{{pair_info()}};
  CHECK(unpool_chain(column({4.5, 7.0}), one) == unpool_once(column({4.5, 7.0}), pair_info()));
}

TEST_CASE("unpool_chain over two levels of an eight-node path follows the composed clusters") {
  Rng rng(12);
  const Graph g = path_graph(8, 1, rng);
  const std::vector<PoolParams> params{random_params(1, 0, rng), random_params(1, 0, rng)};
  const auto levels = pool_hierarchy(g, params);
  REQUIRE(levels.size() == 2);
  UnpoolPlan plan{{levels[0].info, levels[1].info}};

  const auto top = static_cast<Eigen::Index>(levels[1].pooled.num_nodes());
  Matrix distinct(top, 1);
  for (Eigen::Index r = 0; r < top; ++r) distinct(r, 0) = 10.0 * static_cast<double>(r + 1);
  const Matrix out = unpool_chain(distinct, plan);
  const std::vector<PoolInfo> infos{levels[0].info, levels[1].info};
  const auto composed = compose_clusters(infos);
  for (NodeId v = 0; v < 8; ++v) {
    const NodeId mid = levels[0].info.cluster_of[v];
    const double expected = distinct(composed[v], 0) / levels[1].info.node_score[mid] / levels[0].info.node_score[v];
    CHECK(out(v, 0) == doctest::Approx(expected));
    for (NodeId w = 0; w < 8; ++w) {
      if (composed[v] == composed[w] && levels[0].info.node_score[v] == levels[0].info.node_score[w] &&
          levels[1].info.node_score[mid] == levels[1].info.node_score[levels[0].info.cluster_of[w]]) {
        CHECK(out(v, 0) == doctest::Approx(out(w, 0)));
      }
    }
  }
}

TEST_CASE("unpool_backward is the adjoint of unpool_once") {
  CHECK(unpool_backward(Matrix::Zero(3, 2), pair_info()).isZero());

  const Matrix g = column({1.5, 3.0, 4.0});
  const Matrix back = unpool_backward(g, pair_info());
  CHECK(back(0, 0) == doctest::Approx((1.5 + 3.0) / 1.5));
  CHECK(back(1, 0) == 4.0);

  Rng rng(3);
  const Matrix p = random_matrix(2, 3, rng);
  const Matrix u = random_matrix(3, 3, rng);
  const double lhs = (unpool_once(p, pair_info()).array() * u.array()).sum();
  const double rhs = (p.array() * unpool_backward(u, pair_info()).array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("unpool_score_gradient matches a finite difference in the score") {
  Rng rng(5);
  const Matrix p = random_matrix(2, 2, rng);
  const Matrix u = random_matrix(3, 2, rng);
  const auto analytic = unpool_score_gradient(u, p, pair_info());
  REQUIRE(analytic.size() == 1);
  const auto loss = [&](double s) {
    PoolInfo info = pair_info();
    info.node_score[0] = info.node_score[1] = s;
    return (unpool_once(p, info).array() * u.array()).sum();
  };
  const double h = 1e-6;
  CHECK(analytic[0] == doctest::Approx((loss(1.5 + h) - loss(1.5 - h)) / (2 * h)).epsilon(1e-6));
}
