#include "edgepool_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "edgepool/checkpoint.hpp"
#include "edgepool/graph_io.hpp"
#include "edgepool/hierarchy.hpp"
#include "edgepool_cli/bench.hpp"
#include "edgepool_cli/gradcheck.hpp"

namespace edgepool::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

} // namespace

RunManifest::RunManifest(std::string command, std::vector<std::string> argv, std::uint64_t seed)
    : command_(std::move(command)), argv_(std::move(argv)), seed_(seed), started_at_(utc_now()) {}

json RunManifest::to_json() const {
  return {{"command", command_}, {"argv", argv_},         {"seed", seed_},       {"config", config_},
          {"dataset", dataset_}, {"started_at", started_at_}, {"finished_at", finished_at_}, {"outputs", outputs_}};
}

fs::path RunManifest::write(const fs::path& dir) {
  finished_at_ = utc_now();
  const fs::path path = dir / "manifest.json";
  write_json(path, to_json());
  return path;
}

json cross_validate_graph_classifier(const GraphDataset& dataset, const CrossValidationOptions& options,
                                     RunManifest* manifest) {
  dataset.validate();
  options.train.validate();
  if (options.folds < 2) throw std::invalid_argument("need at least 2 folds");
  const std::vector<Fold> folds = kfold_splits(dataset.size(), options.folds, options.train.seed);
  std::vector<json> fold_results(folds.size());
  std::mutex log_mutex;

  auto run_fold = [&](std::size_t k) {
    TrainConfig config = options.train;
    config.seed = derive_seed(options.train.seed, "fold", k);
    GraphClassifier model(model_config_for(config, dataset.feature_width(), dataset.num_classes),
                          derive_seed(config.seed, "init"));
    const History history = train_graph_classifier(model, dataset, folds[k].train, folds[k].test, config,
                                                   [&](const EpochRecord& r) {
                                                     if (options.log == nullptr) return;
                                                     std::lock_guard lock(log_mutex);
                                                     *options.log << "fold " << k << " epoch " << r.epoch
                                                                  << " loss " << r.train_loss << " acc "
                                                                  << r.eval_acc << '\n';
                                                   });
    json entry = {{"fold", k},
                  {"train_size", folds[k].train.size()},
                  {"test_size", folds[k].test.size()},
                  {"test_acc", history.final_eval_acc()}};
    if (options.out_dir) {
      const fs::path csv = *options.out_dir / ("fold_" + std::to_string(k) + "_history.csv");
      const fs::path ckpt = *options.out_dir / ("fold_" + std::to_string(k) + "_checkpoint.json");
      history.write_csv(csv);
      save_checkpoint(ckpt, model.params(), config.to_json());
      entry["history"] = csv.filename().string();
      entry["checkpoint"] = ckpt.filename().string();
    }
    fold_results[k] = std::move(entry);
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, folds.size()));
  if (jobs == 1) {
    for (std::size_t k = 0; k < folds.size(); ++k) run_fold(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < folds.size(); k = next++) {
          try {
            run_fold(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  double mean = 0.0;
  for (const json& f : fold_results) mean += f["test_acc"].get<double>();
  mean /= static_cast<double>(fold_results.size());
  double var = 0.0;
  for (const json& f : fold_results) var += std::pow(f["test_acc"].get<double>() - mean, 2);
  var /= static_cast<double>(fold_results.size());

  if (manifest != nullptr && options.out_dir) {
    for (const json& f : fold_results) {
      manifest->add_output(*options.out_dir / f["history"].get<std::string>());
      manifest->add_output(*options.out_dir / f["checkpoint"].get<std::string>());
    }
  }
  return {{"mean_acc", mean},
          {"std_acc", std::sqrt(var)},
          {"pooling", options.train.pooling ? "edgepool" : "none"},
          {"folds", fold_results}};
}

namespace {

// ---- shared option helpers --------------------------------------------------

struct DatasetSource {
  std::string tu_dir;
  std::string tu_name;
  std::string synthetic;
  std::size_t num_graphs = 200;
  std::size_t num_nodes = 40;
};

GraphDataset load_dataset(const DatasetSource& src, std::uint64_t seed, json& identity) {
  if (!src.tu_dir.empty()) {
    identity = {{"format", "tu"}, {"dir", src.tu_dir}, {"name", src.tu_name}};
    GraphDataset ds = load_tu(src.tu_dir, src.tu_name);
    identity["graphs"] = ds.size();
    return ds;
  }
  SyntheticParams params;
  params.num_graphs = src.num_graphs;
  params.num_nodes = src.num_nodes;
  auto generated = gen_synthetic(parse_synthetic_kind(src.synthetic), params, seed);
  if (!std::holds_alternative<GraphDataset>(generated)) {
    throw std::invalid_argument("synthetic kind '" + src.synthetic + "' does not produce a graph dataset");
  }
  identity = {{"format", "synthetic"}, {"kind", src.synthetic}, {"num_graphs", src.num_graphs},
              {"num_nodes", src.num_nodes}, {"seed", seed}};
  return std::get<GraphDataset>(std::move(generated));
}

ConvKind parse_conv_kind(const std::string& s) { return s == "mlp" ? ConvKind::mlp : ConvKind::mean; }

void add_train_options(CLI::App& cmd, TrainConfig& cfg, std::string& pooling, std::string& conv) {
  cmd.add_option("--pooling", pooling, "none or edgepool")->check(CLI::IsMember({"none", "edgepool"}));
  cmd.add_option("--conv", conv, "mean or mlp")->check(CLI::IsMember({"mean", "mlp"}));
  cmd.add_option("--seed", cfg.seed);
  cmd.add_option("--epochs", cfg.epochs);
  cmd.add_option("--channels", cfg.channels);
  cmd.add_option("--lr", cfg.learning_rate);
  cmd.add_option("--lr-halving-period", cfg.lr_halving_period);
  cmd.add_option("--dropout", cfg.dropout_p);
  cmd.add_option("--edge-dropout", cfg.edge_score_dropout_p);
}

// ---- pool -------------------------------------------------------------------

std::vector<PoolParams> read_pool_params(const fs::path& path, std::size_t levels, std::size_t width) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open params file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("params file: " + std::string(e.what()));
  }
  auto parse_one = [&](const json& e) {
    try {
      const auto w = e.at("weight").get<std::vector<double>>();
      if (w.size() != PoolParams::weight_length(width)) {
        throw FormatError("params file: weight needs " + std::to_string(PoolParams::weight_length(width)) +
                          " entries, got " + std::to_string(w.size()));
      }
      PoolParams p;
      p.weight = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
      p.bias = e.value("bias", 0.0);
      return p;
    } catch (const json::exception& ex) {
      throw FormatError("params file: " + std::string(ex.what()));
    }
  };
  std::vector<PoolParams> out;
  if (j.is_object() && j.contains("levels")) {
    for (const json& e : j["levels"]) out.push_back(parse_one(e));
    if (out.size() < levels) throw FormatError("params file has fewer levels than requested");
    out.resize(levels);
  } else {
    out.assign(levels, parse_one(j));
  }
  return out;
}

int cmd_pool(const std::vector<std::string>& argv, const std::string& input, const std::string& tu_dir,
             const std::string& tu_name, std::size_t index, std::size_t levels, const std::string& params_file,
             std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
  RunManifest manifest("pool", argv, seed);
  Graph graph;
  if (!input.empty()) {
    graph = read_graph_json(input).graph;
    manifest.set_dataset({{"format", "json"}, {"path", input}});
  } else {
    GraphDataset ds = load_tu(tu_dir, tu_name);
    if (index >= ds.size()) throw DatasetError("graph index " + std::to_string(index) + " out of range");
    graph = ds.graphs[index];
    manifest.set_dataset({{"format", "tu"}, {"dir", tu_dir}, {"name", tu_name}, {"index", index}});
  }
  graph = symmetrize(graph);

  std::vector<PoolParams> params;
  if (!params_file.empty()) {
    params = read_pool_params(params_file, levels, graph.feature_width());
  } else {
    for (std::size_t l = 0; l < levels; ++l) {
      Rng rng = make_rng(seed, "pool-params", l);
      std::normal_distribution<double> normal(0.0, 1.0);
      PoolParams p;
      p.weight = Vector(static_cast<Eigen::Index>(PoolParams::weight_length(graph.feature_width())));
      for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight(i) = normal(rng);
      params.push_back(std::move(p));
    }
  }
  manifest.set_config({{"levels", levels}, {"params", params_file.empty() ? json("random") : json(params_file)}});

  const std::vector<PoolLevel> hierarchy = pool_hierarchy(graph, params);
  fs::create_directories(out_dir);
  const fs::path hpath = out_dir / "hierarchy.json";
  write_hierarchy(hpath, hierarchy);
  manifest.add_output(hpath);

  for (std::size_t l = 0; l <= hierarchy.size(); ++l) {
    const Graph& g = l == 0 ? graph : hierarchy[l - 1].pooled;
    DotOptions dot;
    dot.name = "level_" + std::to_string(l);
    if (l < hierarchy.size()) dot.cluster_of = hierarchy[l].info.cluster_of;
    const fs::path dpath = out_dir / (dot.name + ".dot");
    write_text(dpath, to_dot(g, dot));
    manifest.add_output(dpath);
  }
  out << "pooled " << graph.num_nodes() << " nodes";
  for (const PoolLevel& lv : hierarchy) out << " -> " << lv.pooled.num_nodes();
  out << '\n';
  manifest.write(out_dir);
  return kExitSuccess;
}

// ---- train-graph ------------------------------------------------------------

int cmd_train_graph(const std::vector<std::string>& argv, const DatasetSource& src, CrossValidationOptions cv,
                    const fs::path& out_dir, bool verbose, std::ostream& out) {
  RunManifest manifest("train-graph", argv, cv.train.seed);
  json identity;
  const GraphDataset dataset = load_dataset(src, cv.train.seed, identity);
  manifest.set_dataset(identity);
  json config = cv.train.to_json();
  config["folds"] = cv.folds;
  manifest.set_config(config);

  fs::create_directories(out_dir);
  cv.out_dir = out_dir;
  if (verbose) cv.log = &out;
  json summary = cross_validate_graph_classifier(dataset, cv, &manifest);
  const fs::path spath = out_dir / "summary.json";
  write_json(spath, summary);
  manifest.add_output(spath);
  manifest.write(out_dir);
  out << "mean_acc " << summary["mean_acc"].get<double>() << " std_acc " << summary["std_acc"].get<double>() << '\n';
  return kExitSuccess;
}

// ---- train-node -------------------------------------------------------------

NodeTask read_node_task(const fs::path& path, std::uint64_t seed, std::size_t per_train, std::size_t per_test) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  LabeledGraph lg = graph_from_json(j);
  if (!lg.node_labels) throw FormatError(path.string() + ": node task needs node_labels");
  if (j.contains("train_mask") && j.contains("test_mask")) {
    NodeTask task;
    task.graph = std::move(lg.graph);
    task.node_labels = *lg.node_labels;
    const auto train = j["train_mask"].get<std::vector<int>>();
    const auto test = j["test_mask"].get<std::vector<int>>();
    if (train.size() != task.graph.num_nodes() || test.size() != task.graph.num_nodes()) {
      throw FormatError(path.string() + ": mask length must equal num_nodes");
    }
    int max_label = -1;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if ((train[i] != 0) && (test[i] != 0)) throw FormatError(path.string() + ": masks overlap");
      if ((train[i] != 0 || test[i] != 0) && task.node_labels[i] < 0) {
        throw FormatError(path.string() + ": masked node without a label");
      }
      task.train_mask.push_back(train[i] != 0);
      task.test_mask.push_back(test[i] != 0);
      max_label = std::max(max_label, task.node_labels[i]);
    }
    task.num_classes = static_cast<std::size_t>(max_label + 1);
    return task;
  }
  return node_split(symmetrize(lg.graph), *lg.node_labels, per_train, per_test, derive_seed(seed, "node-split"));
}

int cmd_train_node(const std::vector<std::string>& argv, const std::string& input, const std::string& synthetic,
                   const SyntheticParams& sbm, TrainConfig cfg, const fs::path& out_dir, std::ostream& out) {
  RunManifest manifest("train-node", argv, cfg.seed);
  NodeTask task;
  if (!input.empty()) {
    task = read_node_task(input, cfg.seed, sbm.per_class_train, sbm.per_class_test);
    manifest.set_dataset({{"format", "json"}, {"path", input}});
  } else {
    if (parse_synthetic_kind(synthetic) != SyntheticKind::sbm_node_task) {
      throw std::invalid_argument("train-node needs --synthetic sbm");
    }
    task = std::get<NodeTask>(gen_synthetic(SyntheticKind::sbm_node_task, sbm, cfg.seed));
    manifest.set_dataset({{"format", "synthetic"}, {"kind", "sbm_node_task"}, {"num_nodes", sbm.num_nodes},
                          {"blocks", sbm.blocks}, {"p_in", sbm.p_in}, {"p_out", sbm.p_out},
                          {"feature_noise", sbm.feature_noise}, {"seed", cfg.seed}});
  }
  manifest.set_config(cfg.to_json());
  cfg.validate();

  NodeClassifier model(model_config_for(cfg, task.graph.feature_width(), task.num_classes),
                       derive_seed(cfg.seed, "init"));
  const History history = train_node_classifier(model, task, cfg);

  fs::create_directories(out_dir);
  const fs::path hpath = out_dir / "history.csv";
  const fs::path cpath = out_dir / "checkpoint.json";
  const fs::path spath = out_dir / "summary.json";
  history.write_csv(hpath);
  save_checkpoint(cpath, model.params(), cfg.to_json());
  const json summary = {{"test_acc", history.final_eval_acc()},
                        {"pooling", cfg.pooling ? "edgepool" : "none"},
                        {"conv", cfg.conv == ConvKind::mlp ? "mlp" : "mean"},
                        {"train_nodes", task.train_nodes().size()},
                        {"test_nodes", task.test_nodes().size()}};
  write_json(spath, summary);
  for (const auto& p : {hpath, cpath, spath}) manifest.add_output(p);
  manifest.write(out_dir);
  out << "test_acc " << history.final_eval_acc() << '\n';
  return kExitSuccess;
}

// ---- gradcheck --------------------------------------------------------------

int cmd_gradcheck(const std::vector<std::string>& argv, const std::string& cases, const GradcheckOptions& options,
                  const std::string& out_dir, std::ostream& out) {
  RunManifest manifest("gradcheck", argv, options.seed);
  manifest.set_config({{"cases", cases}, {"corrupt_gradient", options.corrupt_gradient}});
  const std::vector<GradcheckResult> results = run_gradcheck(cases, options);
  bool ok = true;
  json report = json::array();
  for (const GradcheckResult& r : results) {
    ok = ok && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_rel_error " << r.max_rel_error << " max_abs_error "
        << r.max_abs_error << " checked " << r.checked << " (rtol " << r.rtol << ", atol " << r.atol << ")";
    if (!r.note.empty()) out << " " << r.note;
    out << '\n';
    report.push_back({{"name", r.name}, {"passed", r.passed}, {"max_rel_error", r.max_rel_error},
                      {"max_abs_error", r.max_abs_error}, {"checked", r.checked}, {"rtol", r.rtol},
                      {"atol", r.atol}, {"note", r.note}});
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path rpath = fs::path(out_dir) / "gradcheck.json";
    write_json(rpath, report);
    manifest.add_output(rpath);
    manifest.write(out_dir);
  }
  return ok ? kExitSuccess : kExitValidationFailure;
}

// ---- bench ------------------------------------------------------------------

int cmd_bench(const std::vector<std::string>& argv, const BenchOptions& options, const std::string& out_dir,
              std::ostream& out) {
  RunManifest manifest("bench", argv, options.seed);
  manifest.set_config({{"min_edges", options.min_edges}, {"max_edges", options.max_edges},
                       {"points", options.points}, {"feature_width", options.feature_width},
                       {"min_seconds", options.min_seconds}});
  const std::vector<BenchRow> rows = run_bench(options);
  const std::string csv = bench_csv(rows);
  out << csv;
  std::vector<double> e, t, m;
  for (const BenchRow& r : rows) {
    e.push_back(static_cast<double>(r.edges));
    t.push_back(r.pool_seconds);
    m.push_back(static_cast<double>(r.peak_aux_bytes));
  }
  const double time_slope = loglog_slope(e, t);
  const double memory_slope = loglog_slope(e, m);
  out << "time_slope " << time_slope << "\nmemory_slope " << memory_slope << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path cpath = fs::path(out_dir) / "bench.csv";
    const fs::path spath = fs::path(out_dir) / "bench_summary.json";
    write_text(cpath, csv);
    write_json(spath, {{"time_slope", std::isnan(time_slope) ? json(nullptr) : json(time_slope)},
                       {"memory_slope", std::isnan(memory_slope) ? json(nullptr) : json(memory_slope)}});
    manifest.add_output(cpath);
    manifest.add_output(spath);
    manifest.write(out_dir);
  }
  return kExitSuccess;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EdgePool graph pooling toolkit"};
  app.require_subcommand(1);

  // pool
  std::string pool_input, tu_dir, tu_name, params_file, out_dir;
  std::size_t tu_index = 0, levels = 1;
  std::uint64_t pool_seed = 0;
  auto* pool = app.add_subcommand("pool", "pool one graph repeatedly and export the hierarchy");
  auto* pool_in = pool->add_option("--input", pool_input, "graph JSON file");
  std::vector<std::string> pool_tu_args;
  auto* pool_tu = pool->add_option("--tu", pool_tu_args, "TU directory and dataset name")->expected(2);
  pool->add_option("--index", tu_index, "graph index within the TU dataset");
  pool->add_option("--levels", levels, "number of pooling levels");
  auto* pool_params = pool->add_option("--params", params_file, "pool parameters JSON");
  pool->add_option("--random-seed", pool_seed, "seed for random pool parameters")->excludes(pool_params);
  pool->add_option("--out", out_dir, "output directory")->required();
  pool_in->excludes(pool_tu);

  // train-graph
  DatasetSource src;
  CrossValidationOptions cv;
  std::string tg_pooling = "edgepool", tg_conv = "mean", tg_out;
  bool tg_verbose = false;
  auto* train_graph = app.add_subcommand("train-graph", "k-fold cross-validation of the graph classifier");
  std::vector<std::string> tg_tu_args;
  auto* tg_tu = train_graph->add_option("--tu", tg_tu_args, "TU directory and dataset name")->expected(2);
  auto* tg_syn = train_graph->add_option("--synthetic", src.synthetic, "synthetic graph dataset kind");
  tg_tu->excludes(tg_syn);
  train_graph->add_option("--num-graphs", src.num_graphs, "synthetic dataset size");
  train_graph->add_option("--num-nodes", src.num_nodes, "synthetic graph size");
  train_graph->add_option("--folds", cv.folds);
  train_graph->add_option("--jobs", cv.jobs, "folds trained in parallel");
  train_graph->add_option("--batch-size", cv.train.batch_size);
  train_graph->add_option("--out", tg_out)->required();
  train_graph->add_flag("--verbose", tg_verbose, "print per-epoch progress");
  add_train_options(*train_graph, cv.train, tg_pooling, tg_conv);

  // train-node
  std::string tn_input, tn_synthetic, tn_pooling = "edgepool", tn_conv = "mean", tn_out;
  TrainConfig tn_cfg;
  SyntheticParams sbm;
  sbm.num_nodes = 200;
  auto* train_node = app.add_subcommand("train-node", "train the node classifier on one task");
  auto* tn_in = train_node->add_option("--input", tn_input, "node task JSON");
  auto* tn_syn = train_node->add_option("--synthetic", tn_synthetic, "synthetic task kind (sbm)");
  tn_in->excludes(tn_syn);
  train_node->add_option("--nodes", sbm.num_nodes);
  train_node->add_option("--blocks", sbm.blocks);
  train_node->add_option("--p-in", sbm.p_in);
  train_node->add_option("--p-out", sbm.p_out);
  train_node->add_option("--noise", sbm.feature_noise);
  train_node->add_option("--per-class-train", sbm.per_class_train);
  train_node->add_option("--per-class-test", sbm.per_class_test);
  train_node->add_option("--out", tn_out)->required();
  add_train_options(*train_node, tn_cfg, tn_pooling, tn_conv);

  // gradcheck
  std::string gc_cases = "all", gc_out;
  GradcheckOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
  gradcheck->add_option("--cases", gc_cases)->check(CLI::IsMember({"all", "edgepool", "unpool", "layers", "models"}));
  gradcheck->add_option("--seed", gc.seed);
  gradcheck->add_flag("--corrupt-gradient", gc.corrupt_gradient, "negative control: perturb analytic gradients");
  gradcheck->add_option("--out", gc_out, "directory for report and manifest");

  // bench
  BenchOptions bench_opts;
  std::string bench_out;
  double min_edges = 1e3, max_edges = 1e6;
  auto* bench = app.add_subcommand("bench", "time pooling across graph sizes");
  bench->add_option("--min-edges", min_edges);
  bench->add_option("--max-edges", max_edges);
  bench->add_option("--points", bench_opts.points);
  bench->add_option("--seed", bench_opts.seed);
  bench->add_option("--min-seconds", bench_opts.min_seconds);
  bench->add_option("--out", bench_out, "directory for CSV and manifest");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitInputError;
  }

  try {
    if (*pool) {
      if (pool_input.empty() && pool_tu->count() == 0) throw std::invalid_argument("pool needs --input or --tu");
      if (pool_tu->count() > 0) {
        tu_dir = pool_tu_args.at(0);
        tu_name = pool_tu_args.at(1);
      }
      return cmd_pool(args, pool_input, tu_dir, tu_name, tu_index, levels, params_file, pool_seed, out_dir, out);
    }
    if (*train_graph) {
      if (tg_tu->count() > 0) {
        src.tu_dir = tg_tu_args.at(0);
        src.tu_name = tg_tu_args.at(1);
      } else if (src.synthetic.empty()) {
        throw std::invalid_argument("train-graph needs --tu or --synthetic");
      }
      cv.train.pooling = tg_pooling == "edgepool";
      cv.train.conv = parse_conv_kind(tg_conv);
      return cmd_train_graph(args, src, cv, tg_out, tg_verbose, out);
    }
    if (*train_node) {
      if (tn_input.empty() && tn_synthetic.empty()) throw std::invalid_argument("train-node needs --input or --synthetic");
      tn_cfg.pooling = tn_pooling == "edgepool";
      tn_cfg.conv = parse_conv_kind(tn_conv);
      return cmd_train_node(args, tn_input, tn_synthetic, sbm, tn_cfg, tn_out, out);
    }
    if (*gradcheck) return cmd_gradcheck(args, gc_cases, gc, gc_out, out);
    if (*bench) {
      if (!(min_edges >= 1.0) || !(max_edges >= 1.0)) throw std::invalid_argument("edge counts must be positive");
      bench_opts.min_edges = static_cast<std::size_t>(std::llround(min_edges));
      bench_opts.max_edges = static_cast<std::size_t>(std::llround(max_edges));
      return cmd_bench(args, bench_opts, bench_out, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

} // namespace edgepool::cli
