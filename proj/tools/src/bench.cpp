#include "edgepool_cli/bench.hpp"

#include <ctime>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "edgepool/dataset.hpp"
#include "edgepool/edgepool.hpp"
#include "edgepool_cli/alloc_tracker.hpp"

namespace edgepool::cli {

namespace {

// CPU time of the calling thread; pooling is single-threaded, and this
// excludes time the scheduler gives to other work.
double thread_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

} // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  if (options.min_edges < 8 || options.max_edges < options.min_edges) {
    throw std::invalid_argument("bench: need 8 <= min_edges <= max_edges");
  }
  if (options.points == 0) throw std::invalid_argument("bench: points must be positive");
#if defined(__GLIBC__)
  // Keep freed blocks in the heap so repeated runs do not pay first-touch
  // page faults for memory the allocator just returned to the kernel.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  const std::size_t points = options.min_edges == options.max_edges ? 1 : std::max<std::size_t>(options.points, 2);

  std::vector<BenchRow> rows;
  for (std::size_t k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    const double target = std::exp(std::log(static_cast<double>(options.min_edges)) * (1.0 - t) +
                                   std::log(static_cast<double>(options.max_edges)) * t);
    const std::size_t undirected = std::max<std::size_t>(4, static_cast<std::size_t>(std::llround(target / 2.0)));
    const std::size_t nodes = std::max<std::size_t>(8, undirected / 2);

    Rng rng = make_rng(options.seed, "bench-graph", k);
    const Graph graph = random_sparse_graph(nodes, undirected, options.feature_width, rng);
    PoolParams params;
    params.weight = Vector(static_cast<Eigen::Index>(PoolParams::weight_length(options.feature_width)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < params.weight.size(); ++i) params.weight(i) = normal(rng);

    BenchRow row;
    row.edges = graph.num_edges();
    row.nodes = graph.num_nodes();

    AllocTracker::reset_peak();
    const std::size_t baseline = AllocTracker::current();
    {
      const PoolResult r = edgepool_forward(graph, params);
      row.peak_aux_bytes = AllocTracker::peak() - baseline;
    }

    double best = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int rep = 0; rep < 10000 && (rep < 5 || total < options.min_seconds); ++rep) {
      const double start = thread_seconds();
      const PoolResult r = edgepool_forward(graph, params);
      const double s = thread_seconds() - start;
      best = std::min(best, s);
      total += s;
    }
    row.pool_seconds = best;
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::ostringstream os;
  os.precision(9);
  os << "edges,nodes,pool_time,peak_aux_memory\n";
  for (const BenchRow& r : rows) os << r.edges << ',' << r.nodes << ',' << r.pool_seconds << ',' << r.peak_aux_bytes << '\n';
  return os.str();
}

} // namespace edgepool::cli
