#include <doctest.h>

#include <cmath>
#include <numeric>

#include "edgepool/layers.hpp"
#include "edgepool/optim.hpp"
#include "edgepool/params.hpp"
#include "test_support.hpp"

using namespace edgepool;
using namespace edgepool::testing;

namespace {

// Central-difference gradient of f at x.
Matrix numeric_grad(const std::function<double(const Matrix&)>& f, Matrix x, double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double hi = f(x);
    x.data()[i] = keep - h;
    const double lo = f(x);
    x.data()[i] = keep;
    g.data()[i] = (hi - lo) / (2 * h);
  }
  return g;
}

void check_close(const Matrix& analytic, const Matrix& numeric, double rtol = 1e-4, double atol = 1e-7) {
  REQUIRE(analytic.rows() == numeric.rows());
  REQUIRE(analytic.cols() == numeric.cols());
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    CHECK(std::abs(analytic.data()[i] - numeric.data()[i]) <= atol + rtol * std::abs(numeric.data()[i]));
  }
}

double dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

} // namespace

TEST_CASE("dense") {
  Rng rng(1);
  const Matrix x = random_matrix(4, 3, rng);
  CHECK(dense_forward(x, Matrix::Identity(3, 3), Matrix::Zero(1, 3)) == x);
  CHECK(dense_forward(column({2}), column({3}), column({1}))(0, 0) == 7.0);
  CHECK_THROWS_AS(dense_forward(x, Matrix::Identity(2, 2), Matrix::Zero(1, 2)), ShapeError);

  const Matrix w = random_matrix(3, 2, rng);
  const Matrix b = random_matrix(1, 2, rng);
  const Matrix up = random_matrix(4, 2, rng);
  const DenseGrads g = dense_backward(x, w, up);
  check_close(g.x, numeric_grad([&](const Matrix& v) { return dot(dense_forward(v, w, b), up); }, x));
  check_close(g.weight, numeric_grad([&](const Matrix& v) { return dot(dense_forward(x, v, b), up); }, w));
  check_close(g.bias, numeric_grad([&](const Matrix& v) { return dot(dense_forward(x, w, v), up); }, b));
}

TEST_CASE("mean_conv") {
  Rng rng(2);
  const Graph none = build_graph(3, {}, random_matrix(3, 2, rng));
  const Matrix ws = random_matrix(2, 2, rng);
  const Matrix wn = random_matrix(2, 2, rng);
  const Matrix b = random_matrix(1, 2, rng);
  CHECK(mean_conv_forward(none, none.node_features(), ws, &wn, b).isApprox(
      dense_forward(none.node_features(), ws, b)));

  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  const Graph pair = undirected(2, {{0, 1}}, x);
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix swapped = mean_conv_forward(pair, x, Matrix::Zero(2, 2), &id, Matrix::Zero(1, 2));
  CHECK(swapped.row(0) == x.row(1));
  CHECK(swapped.row(1) == x.row(0));

  const Graph g = erdos_renyi_graph(8, 0.4, 3, rng);
  const Matrix xs = g.node_features();
  const Matrix w1 = random_matrix(3, 2, rng);
  const Matrix w2 = random_matrix(3, 2, rng);
  const Matrix up = random_matrix(8, 2, rng);
  const MeanConvGrads grads = mean_conv_backward(g, xs, w1, &w2, up);
  check_close(grads.x, numeric_grad([&](const Matrix& v) { return dot(mean_conv_forward(g, v, w1, &w2, b), up); }, xs));
  check_close(grads.w_self,
              numeric_grad([&](const Matrix& v) { return dot(mean_conv_forward(g, xs, v, &w2, b), up); }, w1));
  check_close(grads.w_neigh,
              numeric_grad([&](const Matrix& v) { return dot(mean_conv_forward(g, xs, w1, &v, b), up); }, w2));

  const MeanConvGrads mlp = mean_conv_backward(g, xs, w1, nullptr, up);
  CHECK(mlp.w_neigh.size() == 0);
}

TEST_CASE("neighbor_mean_adjoint is the adjoint of neighbor_mean") {
  Rng rng(3);
  const Graph g = erdos_renyi_graph(20, 0.2, 2, rng);
  const Matrix a = random_matrix(20, 2, rng);
  const Matrix u = random_matrix(20, 2, rng);
  CHECK(dot(neighbor_mean(g, a), u) == doctest::Approx(dot(a, neighbor_mean_adjoint(g, u))).epsilon(1e-12));
}

TEST_CASE("mean_conv is permutation equivariant") {
  Rng rng(4);
  const Graph g = erdos_renyi_graph(12, 0.3, 3, rng);
  std::vector<NodeId> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Graph h = permute(g, perm);
  const Matrix ws = random_matrix(3, 2, rng), wn = random_matrix(3, 2, rng), b = random_matrix(1, 2, rng);
  const Matrix yg = mean_conv_forward(g, g.node_features(), ws, &wn, b);
  const Matrix yh = mean_conv_forward(h, h.node_features(), ws, &wn, b);
  for (NodeId v = 0; v < 12; ++v) CHECK(yh.row(perm[v]).isApprox(yg.row(v), 1e-12));
}

TEST_CASE("batch_norm") {
  BatchNormCache cache;
  const Matrix constant = Matrix::Constant(4, 1, 3.0);
  const Matrix y = batch_norm_forward(constant, Matrix::Ones(1, 1), Matrix::Constant(1, 1, 0.25), cache);
  for (Eigen::Index r = 0; r < 4; ++r) CHECK(y(r, 0) == doctest::Approx(0.25));

  const Matrix lone = batch_norm_forward(Matrix::Constant(1, 2, 9.0), Matrix::Ones(1, 2), Matrix::Constant(1, 2, 0.5), cache);
  CHECK(lone == Matrix::Constant(1, 2, 0.5));
  CHECK_THROWS_AS(batch_norm_forward(Matrix(0, 2), Matrix::Ones(1, 2), Matrix::Zero(1, 2), cache), ShapeError);

  const Matrix pm = batch_norm_forward(column({-1, 1}), Matrix::Ones(1, 1), Matrix::Zero(1, 1), cache);
  CHECK(pm(0, 0) == doctest::Approx(-1.0 / std::sqrt(1.0 + kBatchNormEpsilon)));
  CHECK(pm(1, 0) == doctest::Approx(1.0 / std::sqrt(1.0 + kBatchNormEpsilon)));

  Rng rng(5);
  const Matrix x = random_matrix(6, 3, rng);
  const Matrix gamma = random_matrix(1, 3, rng), beta = random_matrix(1, 3, rng);
  const Matrix up = random_matrix(6, 3, rng);
  batch_norm_forward(x, gamma, beta, cache);
  const BatchNormGrads g = batch_norm_backward(gamma, cache, up);
  const auto f = [&](const Matrix& xx, const Matrix& gg, const Matrix& bb) {
    BatchNormCache c;
    return dot(batch_norm_forward(xx, gg, bb, c), up);
  };
  check_close(g.x, numeric_grad([&](const Matrix& v) { return f(v, gamma, beta); }, x));
  check_close(g.gamma, numeric_grad([&](const Matrix& v) { return f(x, v, beta); }, gamma));
  check_close(g.beta, numeric_grad([&](const Matrix& v) { return f(x, gamma, v); }, beta));
}

TEST_CASE("relu and dropout") {
  const Matrix y = relu_forward(column({-1, 0, 2}));
  CHECK(y == column({0, 0, 2}));
  CHECK(relu_backward(y, column({5, 5, 5})) == column({0, 0, 5}));

  Rng rng(6);
  CHECK(dropout_mask(3, 3, 0.0, rng).size() == 0);
  const Matrix mask = dropout_mask(200, 50, 0.5, rng);
  for (Eigen::Index i = 0; i < mask.size(); ++i) CHECK((mask.data()[i] == 0.0 || mask.data()[i] == 2.0));
  CHECK(mask.mean() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("global_mean_pool") {
  const std::vector<std::uint32_t> one{0};
  CHECK(global_mean_pool(one, 1, column({5})) == column({5}));

  const std::vector<std::uint32_t> ids{0, 0, 1};
  const Matrix x = column({0, 2, 4});
  CHECK(global_mean_pool(ids, 2, x) == column({1, 4}));

  Rng rng(7);
  const std::vector<std::uint32_t> ids2{0, 1, 1, 2, 2, 2};
  const Matrix x2 = random_matrix(6, 3, rng);
  const Matrix pooled = global_mean_pool(ids2, 3, x2);
  const Matrix weighted = pooled.row(0) + 2 * pooled.row(1) + 3 * pooled.row(2);
  CHECK(weighted.isApprox(x2.colwise().sum(), 1e-12));

  const Matrix up = random_matrix(3, 3, rng);
  check_close(global_mean_pool_backward(ids2, 3, up),
              numeric_grad([&](const Matrix& v) { return dot(global_mean_pool(ids2, 3, v), up); }, x2));
}

TEST_CASE("softmax_cross_entropy") {
  const std::vector<int> label0{0};
  const LossAndGrad uniform = softmax_cross_entropy(Matrix::Zero(1, 4), label0);
  CHECK(uniform.loss == doctest::Approx(std::log(4.0)));

  Matrix confident(1, 2);
  confident << 10, -10;
  CHECK(softmax_cross_entropy(confident, label0).loss == doctest::Approx(2.06e-9).epsilon(1e-2));

  Rng rng(8);
  const Matrix logits = random_matrix(5, 3, rng);
  const std::vector<int> labels{0, 2, 1, 1, 0};
  const LossAndGrad lg = softmax_cross_entropy(logits, labels);
  for (Eigen::Index r = 0; r < 5; ++r) CHECK(lg.grad.row(r).sum() == doctest::Approx(0.0));
  check_close(lg.grad, numeric_grad([&](const Matrix& v) { return softmax_cross_entropy(v, labels).loss; }, logits));

  const std::vector<int> bad{3};
  CHECK_THROWS(softmax_cross_entropy(Matrix::Zero(1, 3), bad));
  CHECK(argmax_rows(confident) == std::vector<int>{0});
}

TEST_CASE("adam_step and the step-decay schedule") {
  ParamStore store;
  Parameter& p = store.add("w", 1, 1);
  p.value(0, 0) = 2.0;
  store.zero_grad();
  adam_step(store, 1e-3, 1);
  CHECK(p.value(0, 0) == 2.0);

  p.grad(0, 0) = 1.0;
  adam_step(store, 1e-3, 1);
  CHECK(p.value(0, 0) == doctest::Approx(2.0 - 1e-3).epsilon(1e-7));

  CHECK(step_decay_lr(1e-3, 125, 50) == doctest::Approx(0.25e-3));
  const double expected[] = {1e-3, 0.5e-3, 0.25e-3, 0.125e-3};
  for (std::size_t k = 0; k < 4; ++k) CHECK(step_decay_lr(1e-3, 50 * k, 50) == doctest::Approx(expected[k]));
  CHECK(step_decay_lr(1e-3, 49, 50) == 1e-3);
}

TEST_CASE("ParamStore") {
  ParamStore store;
  Rng rng(9);
  Parameter& a = store.add_glorot("a", 10, 20, rng);
  const double bound = std::sqrt(6.0 / 30.0);
  CHECK(a.value.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.grad.isZero());
  store.add("b", 1, 20);
  CHECK(store.size() == 2);
  CHECK(store.scalar_count() == 220);
  CHECK(store.contains("b"));
  CHECK_FALSE(store.contains("c"));
  CHECK(&store.at("a") == &a);
  CHECK_THROWS(store.add("a", 1, 1));
  CHECK_THROWS(store.at("zzz"));
}
