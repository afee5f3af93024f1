#include "edgepool/checkpoint.hpp"

#include <fstream>

#include "edgepool/graph_io.hpp"

namespace edgepool {

using nlohmann::json;

json checkpoint_to_json(const ParamStore& params, const json& config) {
  json stored = json::object();
  for (const Parameter& p : params.all()) {
    json data = json::array();
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) data.push_back(p.value(r, c));
    }
    stored[p.name] = {{"shape", {p.value.rows(), p.value.cols()}}, {"data", std::move(data)}};
  }
  return {{"format_version", kCheckpointFormatVersion}, {"config", config}, {"params", std::move(stored)}};
}

json load_checkpoint_json(const json& j, ParamStore& params) {
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw FormatError("checkpoint: unsupported format_version");
    }
    const json& stored = j.at("params");
    for (Parameter& p : params.all()) {
      if (!stored.contains(p.name)) throw FormatError("checkpoint: missing parameter '" + p.name + "'");
      const json& entry = stored.at(p.name);
      const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
      if (shape.size() != 2 || shape[0] != p.value.rows() || shape[1] != p.value.cols()) {
        throw FormatError("checkpoint: shape mismatch for '" + p.name + "'");
      }
      const auto data = entry.at("data").get<std::vector<double>>();
      if (data.size() != static_cast<std::size_t>(p.value.size())) {
        throw FormatError("checkpoint: wrong element count for '" + p.name + "'");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.value.cols(); ++c) p.value(r, c) = data[k++];
      }
    }
    return j.value("config", json::object());
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const json& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(params, config).dump() << '\n';
}

json load_checkpoint(const std::filesystem::path& path, ParamStore& params) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint: " + std::string(e.what()));
  }
  return load_checkpoint_json(j, params);
}

} // namespace edgepool
