#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string_view>

#include "edgepool/dataset.hpp"

namespace edgepool {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Splits a comma-separated line into numbers; blank lines yield nothing.
std::vector<double> parse_numbers(std::string_view line, const fs::path& file, std::size_t line_no) {
  std::vector<double> out;
  line = trim(line);
  if (line.empty()) return out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::string_view field = trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw DatasetError(file.string() + ":" + std::to_string(line_no) + ": non-numeric value '" +
                         std::string(field) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::vector<double>> read_rows(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError("cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto row = parse_numbers(line, file, line_no);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

long long as_integer(double v, const fs::path& file) {
  const auto i = static_cast<long long>(v);
  if (static_cast<double>(i) != v) throw DatasetError(file.string() + ": expected integer, got " + std::to_string(v));
  return i;
}

std::vector<long long> read_integers(const fs::path& file) {
  std::vector<long long> out;
  for (const auto& row : read_rows(file)) {
    if (row.size() != 1) throw DatasetError(file.string() + ": expected one value per line");
    out.push_back(as_integer(row[0], file));
  }
  return out;
}

fs::path tu_file(const fs::path& dir, const std::string& name, const char* suffix) {
  return dir / (name + "_" + suffix + ".txt");
}

} // namespace

void GraphDataset::validate() const {
  if (labels.size() != graphs.size()) throw DatasetError(name + ": one label per graph required");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes) {
      throw DatasetError(name + ": label " + std::to_string(l) + " outside 0.." + std::to_string(num_classes - 1));
    }
  }
}

GraphDataset load_tu(const fs::path& dir, const std::string& name) {
  const fs::path a_file = tu_file(dir, name, "A");
  const fs::path indicator_file = tu_file(dir, name, "graph_indicator");
  const fs::path labels_file = tu_file(dir, name, "graph_labels");
  for (const fs::path& p : {a_file, indicator_file, labels_file}) {
    if (!fs::exists(p)) throw DatasetError("missing TU file " + p.string());
  }

  const std::vector<long long> indicator = read_integers(indicator_file);
  const std::vector<long long> raw_labels = read_integers(labels_file);
  const std::size_t num_graphs = raw_labels.size();
  const std::size_t num_nodes = indicator.size();

  // Global (0-based) node -> (graph, local index).
  std::vector<std::size_t> graph_of(num_nodes);
  std::vector<NodeId> local(num_nodes);
  std::vector<std::size_t> graph_size(num_graphs, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    const long long g = indicator[v];
    if (g < 1 || static_cast<std::size_t>(g) > num_graphs) {
      throw DatasetError(indicator_file.string() + ": graph id " + std::to_string(g) + " out of range");
    }
    graph_of[v] = static_cast<std::size_t>(g - 1);
    local[v] = static_cast<NodeId>(graph_size[graph_of[v]]++);
  }

  std::vector<std::vector<double>> attributes;
  const fs::path attr_file = tu_file(dir, name, "node_attributes");
  if (fs::exists(attr_file)) {
    attributes = read_rows(attr_file);
    if (attributes.size() != num_nodes) throw DatasetError(attr_file.string() + ": one row per node required");
    for (const auto& row : attributes) {
      if (row.size() != attributes.front().size()) throw DatasetError(attr_file.string() + ": ragged rows");
    }
  }
  std::vector<long long> node_labels;
  std::map<long long, std::size_t> node_label_index;
  const fs::path node_label_file = tu_file(dir, name, "node_labels");
  if (fs::exists(node_label_file)) {
    node_labels = read_integers(node_label_file);
    if (node_labels.size() != num_nodes) throw DatasetError(node_label_file.string() + ": one line per node required");
    for (long long l : node_labels) node_label_index.emplace(l, 0);
    std::size_t k = 0;
    for (auto& [label, index] : node_label_index) index = k++;
  }

  const std::size_t attr_width = attributes.empty() ? 0 : attributes.front().size();
  const std::size_t width = (attributes.empty() && node_labels.empty()) ? 1 : attr_width + node_label_index.size();

  std::vector<Matrix> features(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    features[g] = Matrix::Zero(static_cast<Eigen::Index>(graph_size[g]), static_cast<Eigen::Index>(width));
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto row = features[graph_of[v]].row(local[v]);
    if (width == 1 && attributes.empty() && node_labels.empty()) {
      row(0) = 1.0;
      continue;
    }
    for (std::size_t c = 0; c < attr_width; ++c) row(static_cast<Eigen::Index>(c)) = attributes[v][c];
    if (!node_labels.empty()) row(static_cast<Eigen::Index>(attr_width + node_label_index.at(node_labels[v]))) = 1.0;
  }

  std::vector<std::set<Edge>> edges(num_graphs);
  {
    std::ifstream in(a_file);
    if (!in) throw DatasetError("cannot open " + a_file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto row = parse_numbers(line, a_file, line_no);
      if (row.empty()) continue;
      if (row.size() != 2) throw DatasetError(a_file.string() + ":" + std::to_string(line_no) + ": expected 'i, j'");
      const long long i = as_integer(row[0], a_file) - 1;
      const long long j = as_integer(row[1], a_file) - 1;
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= num_nodes || static_cast<std::size_t>(j) >= num_nodes) {
        throw DatasetError(a_file.string() + ":" + std::to_string(line_no) + ": node index out of range");
      }
      const auto u = static_cast<std::size_t>(i);
      const auto w = static_cast<std::size_t>(j);
      if (graph_of[u] != graph_of[w]) {
        throw DatasetError(a_file.string() + ":" + std::to_string(line_no) + ": edge crosses graphs " +
                           std::to_string(graph_of[u] + 1) + " and " + std::to_string(graph_of[w] + 1));
      }
      if (u == w) continue;
      edges[graph_of[u]].insert({local[u], local[w]});
      edges[graph_of[u]].insert({local[w], local[u]});
    }
  }

  std::set<long long> distinct(raw_labels.begin(), raw_labels.end());
  std::map<long long, int> label_index;
  for (long long l : distinct) label_index.emplace(l, static_cast<int>(label_index.size()));

  GraphDataset ds;
  ds.name = name;
  ds.num_classes = label_index.size();
  ds.graphs.reserve(num_graphs);
  ds.labels.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    ds.graphs.push_back(build_graph(graph_size[g], std::vector<Edge>(edges[g].begin(), edges[g].end()),
                                    std::move(features[g])));
    ds.labels.push_back(label_index.at(raw_labels[g]));
  }
  return ds;
}

void write_tu(const GraphDataset& dataset, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream a(tu_file(dir, name, "A"));
  std::ofstream indicator(tu_file(dir, name, "graph_indicator"));
  std::ofstream labels(tu_file(dir, name, "graph_labels"));
  std::ofstream attributes(tu_file(dir, name, "node_attributes"));
  if (!a || !indicator || !labels || !attributes) throw DatasetError("cannot write TU files into " + dir.string());

  char buf[32];
  std::size_t offset = 0;
  for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
    const Graph& graph = dataset.graphs[g];
    for (const Edge& e : graph.edges()) a << (offset + e.src + 1) << ", " << (offset + e.dst + 1) << '\n';
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
      indicator << (g + 1) << '\n';
      for (Eigen::Index c = 0; c < graph.node_features().cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", graph.node_features()(static_cast<Eigen::Index>(v), c));
        attributes << (c ? ", " : "") << buf;
      }
      attributes << '\n';
    }
    labels << dataset.labels[g] << '\n';
    offset += graph.num_nodes();
  }
}

} // namespace edgepool
