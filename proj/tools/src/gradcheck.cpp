#include "edgepool_cli/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "edgepool/dataset.hpp"
#include "edgepool/edgepool.hpp"
#include "edgepool/layers.hpp"
#include "edgepool/models.hpp"
#include "edgepool/unpool.hpp"

namespace edgepool::cli {

namespace {

constexpr double kStep = 1e-6;
constexpr int kMaxAttempts = 50;

class Checker {
public:
  Checker(std::string name, double rtol, double atol, bool corrupt) : corrupt_(corrupt) {
    result_.name = std::move(name);
    result_.rtol = rtol;
    result_.atol = atol;
  }

  void compare(double analytic, double numeric) {
    if (corrupt_ && result_.checked == 0) analytic += 1e-3 + 0.1 * std::abs(analytic);
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    result_.max_abs_error = std::max(result_.max_abs_error, diff);
    if (scale > result_.atol) result_.max_rel_error = std::max(result_.max_rel_error, diff / scale);
    if (diff > result_.atol + result_.rtol * std::abs(numeric)) result_.passed = false;
    ++result_.checked;
  }

  void compare(const Matrix& analytic, const Matrix& numeric) {
    if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
      result_.passed = false;
      result_.note = "shape mismatch";
      return;
    }
    for (Eigen::Index i = 0; i < analytic.size(); ++i) compare(analytic.data()[i], numeric.data()[i]);
  }

  void fail(std::string note) {
    result_.passed = false;
    result_.note = std::move(note);
  }
  void note(std::string text) { result_.note = std::move(text); }

  GradcheckResult finish() { return std::move(result_); }

private:
  bool corrupt_;
  GradcheckResult result_;
};

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

/// Central differences of `loss` with respect to every entry of `m`.
Matrix numeric_grad(Matrix& m, const std::function<double()>& loss) {
  Matrix g(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double saved = m.data()[i];
    m.data()[i] = saved + kStep;
    const double up = loss();
    m.data()[i] = saved - kStep;
    const double down = loss();
    m.data()[i] = saved;
    g.data()[i] = (up - down) / (2.0 * kStep);
  }
  return g;
}

double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

Graph random_graph(std::size_t n, std::size_t undirected_edges, std::size_t f, Rng& rng) {
  return random_sparse_graph(n, undirected_edges, f, rng);
}

Graph with_edge_features(const Graph& g, std::size_t width, Rng& rng) {
  return build_graph(g.num_nodes(), std::vector<Edge>(g.edges().begin(), g.edges().end()), g.node_features(), gaussian(static_cast<Eigen::Index>(g.num_edges()),
                                                                            static_cast<Eigen::Index>(width), rng));
}

// ---- edgepool ---------------------------------------------------------------

enum class PoolLoss { linear, tanh_unpool };

/// One instance: returns false when the matching moves under the finite
/// difference steps, so the caller can draw another instance.
bool check_pool_instance(Checker& checker, const Graph& graph, const PoolOptions& options, PoolLoss loss_kind,
                         Rng& rng) {
  const auto f = static_cast<Eigen::Index>(graph.feature_width());
  Matrix x = graph.node_features();
  PoolParams params;
  params.weight = gaussian(static_cast<Eigen::Index>(PoolParams::weight_length(
                               graph.feature_width(), graph.edge_feature_width())),
                           1, rng);
  params.bias = gaussian(1, 1, rng)(0, 0);
  Matrix bias_box(1, 1);
  bias_box(0, 0) = params.bias;
  Matrix weight_box = params.weight;

  const PoolResult base = edgepool_forward(graph, x, params, options);
  const Eigen::Index out_rows = loss_kind == PoolLoss::linear ? static_cast<Eigen::Index>(base.info.pooled_num_nodes)
                                                              : static_cast<Eigen::Index>(graph.num_nodes());
  const Matrix target = gaussian(out_rows, f, rng);

  bool stable = true;
  auto loss = [&]() {
    PoolParams p{weight_box, bias_box(0, 0)};
    const PoolResult r = edgepool_forward(graph, x, p, options);
    if (r.info.matched_edges != base.info.matched_edges) stable = false;
    const Matrix& pooled = r.pooled.node_features();
    if (loss_kind == PoolLoss::linear) return inner(target, pooled);
    return inner(target, unpool_once(pooled.array().tanh().matrix(), r.info));
  };

  const Matrix num_x = numeric_grad(x, loss);
  const Matrix num_w = numeric_grad(weight_box, loss);
  const Matrix num_b = numeric_grad(bias_box, loss);
  if (!stable) return false;

  PoolGradients grads;
  if (loss_kind == PoolLoss::linear) {
    grads = edgepool_backward(graph, x, params, base.info, base.scores, target, options);
  } else {
    const Matrix activated = base.pooled.node_features().array().tanh().matrix();
    const Matrix up = unpool_backward(target, base.info);
    const std::vector<double> score_grad = unpool_score_gradient(target, activated, base.info);
    const Matrix through_tanh = up.cwiseProduct((1.0 - activated.array().square()).matrix());
    grads = edgepool_backward(graph, x, params, base.info, base.scores, through_tanh, options, score_grad);
  }
  Matrix grad_b(1, 1);
  grad_b(0, 0) = grads.bias;
  checker.compare(grads.node_features, num_x);
  checker.compare(Matrix(grads.weight), num_w);
  checker.compare(grad_b, num_b);
  return true;
}

GradcheckResult pool_case(std::string name, std::uint64_t seed, bool corrupt, std::size_t edge_width,
                          MergeCombiner combiner, PoolLoss loss_kind) {
  Rng rng = make_rng(seed, "gradcheck-" + name);
  Checker checker(std::move(name), 1e-4, 1e-7, corrupt);
  PoolOptions options;
  options.combiner = combiner;
  options.merge_weights = {0.7, 1.3, 0.4, -0.6};
  constexpr int kInstances = 20;
  int done = 0;
  for (int attempt = 0; done < kInstances && attempt < kMaxAttempts; ++attempt) {
    const std::size_t f = combiner == MergeCombiner::weighted_linear ? edge_width : 3;
    Graph g = random_graph(10, 14, f, rng);
    if (edge_width > 0) g = with_edge_features(g, edge_width, rng);
    if (check_pool_instance(checker, g, options, loss_kind, rng)) ++done;
  }
  if (done < kInstances) checker.fail("too few matching-stable instances");
  else checker.note(std::to_string(done) + " instances");
  return checker.finish();
}

// ---- unpool -----------------------------------------------------------------

std::vector<PoolInfo> random_chain(Rng& rng, std::size_t n) {
  Graph g = random_graph(n, n + n / 2, 2, rng);
  std::vector<PoolInfo> levels;
  for (int level = 0; level < 2; ++level) {
    PoolParams params{gaussian(static_cast<Eigen::Index>(PoolParams::weight_length(g.feature_width())), 1, rng), 0.1};
    PoolResult r = edgepool_forward(g, params);
    levels.push_back(r.info);
    g = std::move(r.pooled);
  }
  return levels;
}

GradcheckResult unpool_adjoint_case(std::uint64_t seed, bool corrupt) {
  Checker checker("unpool-adjoint", 0.0, 1e-8, corrupt);
  Rng rng = make_rng(seed, "gradcheck-unpool-adjoint");
  for (int k = 0; k < 20; ++k) {
    UnpoolPlan plan{random_chain(rng, 16)};
    const Matrix x = gaussian(static_cast<Eigen::Index>(plan.levels.back().pooled_num_nodes), 3, rng);
    const Matrix g = gaussian(static_cast<Eigen::Index>(plan.levels.front().input_num_nodes()), 3, rng);
    checker.compare(inner(x, unpool_chain_backward(g, plan)), inner(unpool_chain(x, plan), g));
  }
  return checker.finish();
}

GradcheckResult unpool_fd_case(std::uint64_t seed, bool corrupt) {
  Checker checker("unpool-chain", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-unpool-chain");
  for (int k = 0; k < 10; ++k) {
    UnpoolPlan plan{random_chain(rng, 12)};
    Matrix x = gaussian(static_cast<Eigen::Index>(plan.levels.back().pooled_num_nodes), 2, rng);
    const Matrix g = gaussian(static_cast<Eigen::Index>(plan.levels.front().input_num_nodes()), 2, rng);
    const Matrix num = numeric_grad(x, [&] { return inner(g, unpool_chain(x, plan)); });
    checker.compare(unpool_chain_backward(g, plan), num);
  }
  return checker.finish();
}

GradcheckResult unpool_score_case(std::uint64_t seed, bool corrupt) {
  Checker checker("unpool-score", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-unpool-score");
  for (int k = 0; k < 10; ++k) {
    PoolInfo info = random_chain(rng, 12).front();
    const Matrix pooled = gaussian(static_cast<Eigen::Index>(info.pooled_num_nodes), 2, rng);
    const Matrix g = gaussian(static_cast<Eigen::Index>(info.input_num_nodes()), 2, rng);
    const std::vector<double> analytic = unpool_score_gradient(g, pooled, info);
    for (std::size_t m = 0; m < info.matching.size(); ++m) {
      const Edge e = info.matching[m];
      const double saved = info.node_score[e.src];
      auto at = [&](double s) {
        info.node_score[e.src] = s;
        info.node_score[e.dst] = s;
        return inner(g, unpool_once(pooled, info));
      };
      const double numeric = (at(saved + kStep) - at(saved - kStep)) / (2.0 * kStep);
      at(saved);
      checker.compare(analytic[m], numeric);
    }
  }
  return checker.finish();
}

// ---- layers -----------------------------------------------------------------

GradcheckResult dense_case(std::uint64_t seed, bool corrupt) {
  Checker checker("dense", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-dense");
  Matrix x = gaussian(5, 4, rng), w = gaussian(4, 3, rng), b = gaussian(1, 3, rng);
  const Matrix g = gaussian(5, 3, rng);
  auto loss = [&] { return inner(g, dense_forward(x, w, b)); };
  const DenseGrads grads = dense_backward(x, w, g);
  checker.compare(grads.x, numeric_grad(x, loss));
  checker.compare(grads.weight, numeric_grad(w, loss));
  checker.compare(grads.bias, numeric_grad(b, loss));
  return checker.finish();
}

GradcheckResult mean_conv_case(std::uint64_t seed, bool corrupt, bool with_neighbors) {
  Checker checker(with_neighbors ? "mean_conv" : "mean_conv_mlp", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-" + std::string(with_neighbors ? "mean-conv" : "mean-conv-mlp"));
  const Graph graph = build_graph(8, [&] {
    // Directed and partly asymmetric, with one node lacking in-neighbours.
    std::vector<Edge> e{{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 2}, {4, 5}, {5, 6}, {6, 4}, {0, 7}, {2, 5}};
    return e;
  }(), gaussian(8, 3, rng));
  Matrix x = graph.node_features(), ws = gaussian(3, 4, rng), wn = gaussian(3, 4, rng), b = gaussian(1, 4, rng);
  const Matrix g = gaussian(8, 4, rng);
  const Matrix* wn_ptr = with_neighbors ? &wn : nullptr;
  auto loss = [&] { return inner(g, mean_conv_forward(graph, x, ws, wn_ptr, b)); };
  const MeanConvGrads grads = mean_conv_backward(graph, x, ws, wn_ptr, g);
  checker.compare(grads.x, numeric_grad(x, loss));
  checker.compare(grads.w_self, numeric_grad(ws, loss));
  if (with_neighbors) checker.compare(grads.w_neigh, numeric_grad(wn, loss));
  checker.compare(grads.bias, numeric_grad(b, loss));
  return checker.finish();
}

GradcheckResult batch_norm_case(std::uint64_t seed, bool corrupt) {
  Checker checker("batch_norm", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-batch-norm");
  Matrix x = gaussian(6, 3, rng), gamma = gaussian(1, 3, rng), beta = gaussian(1, 3, rng);
  const Matrix g = gaussian(6, 3, rng);
  auto loss = [&] {
    BatchNormCache cache;
    return inner(g, batch_norm_forward(x, gamma, beta, cache));
  };
  BatchNormCache cache;
  batch_norm_forward(x, gamma, beta, cache);
  const BatchNormGrads grads = batch_norm_backward(gamma, cache, g);
  checker.compare(grads.x, numeric_grad(x, loss));
  checker.compare(grads.gamma, numeric_grad(gamma, loss));
  checker.compare(grads.beta, numeric_grad(beta, loss));
  return checker.finish();
}

GradcheckResult relu_case(std::uint64_t seed, bool corrupt) {
  Checker checker("relu", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-relu");
  Matrix x = gaussian(6, 4, rng);
  // Keep inputs away from the kink.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double& v = x.data()[i];
    if (std::abs(v) < 0.05) v = v < 0 ? -0.05 : 0.05;
  }
  const Matrix g = gaussian(6, 4, rng);
  const Matrix analytic = relu_backward(relu_forward(x), g);
  checker.compare(analytic, numeric_grad(x, [&] { return inner(g, relu_forward(x)); }));
  return checker.finish();
}

GradcheckResult global_mean_pool_case(std::uint64_t seed, bool corrupt) {
  Checker checker("global_mean_pool", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-global-mean-pool");
  const std::vector<std::uint32_t> ids{0, 0, 1, 2, 2, 2, 1};
  Matrix x = gaussian(7, 3, rng);
  const Matrix g = gaussian(3, 3, rng);
  checker.compare(global_mean_pool_backward(ids, 3, g),
                  numeric_grad(x, [&] { return inner(g, global_mean_pool(ids, 3, x)); }));
  return checker.finish();
}

GradcheckResult cross_entropy_case(std::uint64_t seed, bool corrupt) {
  Checker checker("softmax_cross_entropy", 1e-4, 1e-7, corrupt);
  Rng rng = make_rng(seed, "gradcheck-cross-entropy");
  Matrix logits = gaussian(5, 4, rng, 2.0);
  const std::vector<int> labels{0, 3, 1, 1, 2};
  checker.compare(softmax_cross_entropy(logits, labels).grad,
                  numeric_grad(logits, [&] { return softmax_cross_entropy(logits, labels).loss; }));
  return checker.finish();
}

// ---- models -----------------------------------------------------------------

bool same_matchings(const std::vector<PoolInfo>& a, const std::vector<PoolInfo>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].matched_edges != b[k].matched_edges) return false;
  }
  return true;
}

template <class Model, class Input>
bool check_model_instance(Checker& checker, Model& model, const Input& input, std::span<const int> labels) {
  const ForwardOptions eval{false, 0};
  auto loss = [&] { return softmax_cross_entropy(model.forward(input, eval), labels).loss; };
  model.params().zero_grad();
  const Matrix logits = model.forward(input, eval);
  const std::vector<PoolInfo> base = model.last_pool_infos();
  model.backward(softmax_cross_entropy(logits, labels).grad);

  bool stable = true;
  std::vector<std::pair<Matrix, Matrix>> pairs;
  for (Parameter& p : model.params().all()) {
    const Matrix analytic = p.grad;
    const Matrix numeric = numeric_grad(p.value, [&] {
      const double l = loss();
      if (!same_matchings(model.last_pool_infos(), base)) stable = false;
      return l;
    });
    pairs.emplace_back(analytic, numeric);
  }
  if (!stable) return false;
  for (const auto& [a, n] : pairs) checker.compare(a, n);
  return true;
}

GradcheckResult graph_classifier_case(std::uint64_t seed, bool corrupt) {
  Checker checker("graph_classifier", 1e-3, 1e-6, corrupt);
  Rng rng = make_rng(seed, "gradcheck-graph-classifier");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Graph> graphs{random_graph(6, 7, 2, rng), random_graph(7, 9, 2, rng)};
    const BatchedGraph b = batch(std::span<const Graph>(graphs));
    ModelConfig config;
    config.in_features = 2;
    config.channels = 3;
    config.num_classes = 2;
    GraphClassifier model(config, derive_seed(seed, "model", static_cast<std::uint64_t>(attempt)));
    const std::vector<int> labels{0, 1};
    if (check_model_instance(checker, model, b, labels)) return checker.finish();
  }
  checker.fail("no matching-stable instance");
  return checker.finish();
}

GradcheckResult node_classifier_case(std::uint64_t seed, bool corrupt) {
  Checker checker("node_classifier", 1e-3, 1e-6, corrupt);
  Rng rng = make_rng(seed, "gradcheck-node-classifier");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Graph g = random_graph(12, 18, 2, rng);
    ModelConfig config;
    config.in_features = 2;
    config.channels = 3;
    config.num_classes = 3;
    NodeClassifier model(config, derive_seed(seed, "model", static_cast<std::uint64_t>(attempt)));
    std::vector<int> labels(12);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
    if (check_model_instance(checker, model, g, labels)) return checker.finish();
  }
  checker.fail("no matching-stable instance");
  return checker.finish();
}

} // namespace

std::vector<GradcheckResult> run_gradcheck(std::string_view group, const GradcheckOptions& options) {
  const bool all = group == "all";
  if (!all && group != "edgepool" && group != "unpool" && group != "layers" && group != "models") {
    throw std::invalid_argument("unknown gradcheck case group '" + std::string(group) + "'");
  }
  const std::uint64_t s = options.seed;
  const bool c = options.corrupt_gradient;
  std::vector<GradcheckResult> out;
  if (all || group == "edgepool") {
    out.push_back(pool_case("edgepool", s, c, 0, MergeCombiner::sum, PoolLoss::linear));
    out.push_back(pool_case("edgepool_edge_features", s, c, 2, MergeCombiner::sum, PoolLoss::linear));
    out.push_back(pool_case("edgepool_weighted_merge", s, c, 3, MergeCombiner::weighted_linear, PoolLoss::linear));
    out.push_back(pool_case("edgepool_through_unpool", s, c, 0, MergeCombiner::sum, PoolLoss::tanh_unpool));
  }
  if (all || group == "unpool") {
    out.push_back(unpool_adjoint_case(s, c));
    out.push_back(unpool_fd_case(s, c));
    out.push_back(unpool_score_case(s, c));
  }
  if (all || group == "layers") {
    out.push_back(dense_case(s, c));
    out.push_back(mean_conv_case(s, c, true));
    out.push_back(mean_conv_case(s, c, false));
    out.push_back(batch_norm_case(s, c));
    out.push_back(relu_case(s, c));
    out.push_back(global_mean_pool_case(s, c));
    out.push_back(cross_entropy_case(s, c));
  }
  if (all || group == "models") {
    out.push_back(graph_classifier_case(s, c));
    out.push_back(node_classifier_case(s, c));
  }
  return out;
}

} // namespace edgepool::cli
