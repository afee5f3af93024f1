#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgepool/dataset.hpp"
#include "edgepool/train.hpp"

namespace edgepool::cli {

enum ExitCode : int {
  kExitSuccess = 0,
  kExitValidationFailure = 1,
  kExitInputError = 2,
};

/// Records what a command ran on and what it wrote, next to its outputs.
class RunManifest {
public:
  RunManifest(std::string command, std::vector<std::string> argv, std::uint64_t seed);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_dataset(nlohmann::json dataset) { dataset_ = std::move(dataset); }
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }

  nlohmann::json to_json() const;
  /// Stamps the end time and writes `manifest.json` into `dir`.
  std::filesystem::path write(const std::filesystem::path& dir);

private:
  std::string command_;
  std::vector<std::string> argv_;
  std::uint64_t seed_;
  std::string started_at_;
  std::string finished_at_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json dataset_ = nlohmann::json::object();
  std::vector<std::string> outputs_;
};

struct CrossValidationOptions {
  TrainConfig train;
  std::size_t folds = 10;
  /// Folds trained concurrently; results do not depend on it.
  std::size_t jobs = 1;
  /// When set, per-fold history CSV and checkpoint files are written here.
  std::optional<std::filesystem::path> out_dir;
  /// Progress lines go here when non-null.
  std::ostream* log = nullptr;
};

/// k-fold cross-validation of the graph classifier. Returns
/// {mean_acc, std_acc, folds: [{fold, train_size, test_size, test_acc, history, checkpoint}]}
/// where test_acc is the accuracy after the final epoch.
nlohmann::json cross_validate_graph_classifier(const GraphDataset& dataset, const CrossValidationOptions& options,
                                               RunManifest* manifest = nullptr);

/// Parses and runs one command line (argv[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace edgepool::cli
