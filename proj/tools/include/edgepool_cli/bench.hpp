#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edgepool::cli {

struct BenchOptions {
  std::size_t min_edges = 1000;
  std::size_t max_edges = 1000000;
  /// Log-spaced sizes between min and max, inclusive.
  std::size_t points = 7;
  std::uint64_t seed = 0;
  std::size_t feature_width = 8;
  /// Each size repeats (at least 5 times) until this much thread CPU time has
  /// accumulated; the fastest run is reported.
  double min_seconds = 1.0;
};

struct BenchRow {
  std::size_t edges = 0;
  std::size_t nodes = 0;
  double pool_seconds = 0.0;
  std::size_t peak_aux_bytes = 0;
};

/// Random graphs with mean degree 4; `edges` counts directed edges.
std::vector<BenchRow> run_bench(const BenchOptions& options);

/// Least-squares slope of log(y) against log(x). NaN with fewer than two points.
double loglog_slope(std::span<const double> x, std::span<const double> y);

std::string bench_csv(std::span<const BenchRow> rows);

} // namespace edgepool::cli
