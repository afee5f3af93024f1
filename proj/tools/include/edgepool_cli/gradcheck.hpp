#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace edgepool::cli {

struct GradcheckResult {
  std::string name;
  double rtol = 0.0;
  double atol = 0.0;
  std::size_t checked = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  bool passed = true;
  std::string note;
};

struct GradcheckOptions {
  std::uint64_t seed = 0;
  /// Perturbs one analytic entry per case so the checker must report failure.
  bool corrupt_gradient = false;
};

/// Groups: all, edgepool, unpool, layers, models. Throws std::invalid_argument
/// for an unknown group.
std::vector<GradcheckResult> run_gradcheck(std::string_view group, const GradcheckOptions& options);

} // namespace edgepool::cli
