#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdx/point.hpp"
#include "kdx/rng.hpp"
#include "kdx/search.hpp"
#include "kdx/tree.hpp"

// Experiment harness: generates point sets, runs instrumented queries over a
// grid of n, and fits the models behind the two headline claims --
// buckets examined stay flat as n grows, nodes visited grow like log2(n).
//
// Everything except wall-clock timing is a pure function of the seed; the
// wall_ms fields are explicitly non-deterministic and excluded from
// reproducibility comparisons.

namespace kdx::bench {

enum class Distribution { uniform_cube, gaussian, clustered };
enum class Variant { interior, bucket };

inline std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::uniform_cube: return "uniform-cube";
    case Distribution::gaussian: return "gaussian";
    case Distribution::clustered: return "clustered";
  }
  throw std::invalid_argument("unknown distribution");
}

inline Distribution distribution_from_string(const std::string& name) {
  if (name == "uniform-cube") return Distribution::uniform_cube;
  if (name == "gaussian") return Distribution::gaussian;
  if (name == "clustered") return Distribution::clustered;
  throw std::invalid_argument("unknown distribution: " + name);
}

inline std::string to_string(Variant v) {
  return v == Variant::interior ? "interior" : "bucket";
}

inline Variant variant_from_string(const std::string& name) {
  if (name == "interior") return Variant::interior;
  if (name == "bucket") return Variant::bucket;
  throw std::invalid_argument("unknown variant: " + name);
}

namespace detail {

// Fixed mixture shape for the clustered distribution: eight isotropic
// Gaussian blobs with sigma 0.05, centers uniform in the unit cube.
struct ClusterModel {
  static constexpr int kClusters = 8;
  static constexpr double kSigma = 0.05;
  std::vector<double> centers;  // kClusters * d, row-major

  static ClusterModel derive(std::size_t d, std::uint64_t seed) {
    ClusterModel model;
    Xoshiro256pp rng(seed);
    model.centers.resize(kClusters * d);
    for (double& c : model.centers) c = uniform01(rng);
    return model;
  }
};

inline PointSet sample_points(Distribution dist, std::size_t n, std::size_t d,
                              std::uint64_t seed, const ClusterModel* clusters) {
  Xoshiro256pp rng(seed);
  PointSet points(d);
  std::vector<double> coords(d);
  for (std::size_t i = 0; i < n; ++i) {
    switch (dist) {
      case Distribution::uniform_cube:
        for (double& c : coords) c = uniform01(rng);
        break;
      case Distribution::gaussian:
        for (double& c : coords) c = standard_normal(rng);
        break;
      case Distribution::clustered: {
        const auto which = static_cast<std::size_t>(
            rng.next() % static_cast<std::uint64_t>(ClusterModel::kClusters));
        for (std::size_t axis = 0; axis < d; ++axis)
          coords[axis] = clusters->centers[which * d + axis] +
                         ClusterModel::kSigma * standard_normal(rng);
        break;
      }
    }
    points.add(Point(coords, static_cast<std::uint32_t>(i)));
  }
  return points;
}

}  // namespace detail

/// n i.i.d. points from the named distribution with ids 0..n-1.
/// Deterministic for a fixed seed.
inline PointSet generate_points(Distribution dist, std::size_t n, std::size_t d,
                                std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("generate_points: d must be >= 1");
  if (dist == Distribution::clustered) {
    const auto model =
        detail::ClusterModel::derive(d, derive_seed(seed, "cluster-centers"));
    return detail::sample_points(dist, n, d, derive_seed(seed, "points"), &model);
  }
  return detail::sample_points(dist, n, d, derive_seed(seed, "points"), nullptr);
}

struct ExperimentConfig {
  Distribution distribution = Distribution::uniform_cube;
  std::vector<std::size_t> n_grid;
  std::size_t d = 2;
  std::size_t k = 1;
  std::uint32_t b = 1;
  std::size_t queries_per_n = 500;
  std::uint64_t seed = 0;
  Variant variant = Variant::bucket;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct RowStats {
  std::size_t n = 0;
  Summary nodes_visited;
  Summary buckets_examined;
  Summary distance_evaluations;
  double wall_ms_mean = 0.0;    // non-deterministic
  double wall_ms_median = 0.0;  // non-deterministic
};

/// Ordinary least squares y = slope * x + intercept.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  double slope_stderr = 0.0;
};

inline FitResult linear_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  if (m != ys.size() || m < 2)
    throw std::invalid_argument("linear_fit: need two or more paired samples");
  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= static_cast<double>(m);
  y_mean /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
    syy += (ys[i] - y_mean) * (ys[i] - y_mean);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double residual = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += residual * residual;
  }
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ssr / syy;
  fit.slope_stderr =
      m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
  return fit;
}

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RowStats> rows;
  FitResult nodes_vs_log2n;
  FitResult nodes_vs_n;
  FitResult buckets_vs_n;
};

namespace detail {

struct Welford {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double value) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
  }

  Summary summary() const {
    return {mean, count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0};
  }
};

template <typename Tree>
RowStats run_cell(const Tree& tree, const std::vector<Point>& queries,
                  std::size_t k) {
  Welford nodes, buckets, dists;
  std::vector<double> times_ms;
  times_ms.reserve(queries.size());
  for (const Point& q : queries) {
    const auto start = std::chrono::steady_clock::now();
    const KnnResult result = knn(tree, q, k);
    const auto stop = std::chrono::steady_clock::now();
    nodes.add(static_cast<double>(result.stats.nodes_visited));
    buckets.add(static_cast<double>(result.stats.buckets_examined));
    dists.add(static_cast<double>(result.stats.distance_evaluations));
    times_ms.push_back(
        std::chrono::duration<double, std::milli>(stop - start).count());
  }
  RowStats row;
  row.n = tree.size();
  row.nodes_visited = nodes.summary();
  row.buckets_examined = buckets.summary();
  row.distance_evaluations = dists.summary();
  double sum = 0.0;
  for (const double t : times_ms) sum += t;
  row.wall_ms_mean = sum / static_cast<double>(times_ms.size());
  std::sort(times_ms.begin(), times_ms.end());
  const std::size_t mid = times_ms.size() / 2;
  row.wall_ms_median = times_ms.size() % 2 == 1
                           ? times_ms[mid]
                           : 0.5 * (times_ms[mid - 1] + times_ms[mid]);
  return row;
}

}  // namespace detail

/// Runs the configured sweep: per grid cell, builds the tree, issues
/// queries_per_n fresh-point queries, and aggregates stats; then fits
/// nodes_visited against log2(n) and n, and buckets_examined against n.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.n_grid.empty())
    throw std::invalid_argument("run_experiment: empty n grid");
  if (!std::is_sorted(config.n_grid.begin(), config.n_grid.end()))
    throw std::invalid_argument("run_experiment: n grid must be nondecreasing");
  if (config.queries_per_n < 1)
    throw std::invalid_argument("run_experiment: queries_per_n must be >= 1");
  if (config.d < 1 || config.k < 1 || config.b < 1)
    throw std::invalid_argument("run_experiment: d, k, b must all be >= 1");

  ExperimentReport report;
  report.config = config;
  for (const std::size_t n : config.n_grid) {
    const std::uint64_t cell_seed = derive_seed(config.seed, n);
    const std::uint64_t data_seed = derive_seed(cell_seed, "data");
    const std::uint64_t query_seed = derive_seed(cell_seed, "queries");

    PointSet data(config.d);
    PointSet query_set(config.d);
    if (config.distribution == Distribution::clustered) {
      // Data and queries share one mixture, so queries land where data is.
      const auto model = detail::ClusterModel::derive(
          config.d, derive_seed(cell_seed, "cluster-centers"));
      data = detail::sample_points(config.distribution, n, config.d, data_seed, &model);
      query_set = detail::sample_points(config.distribution, config.queries_per_n,
                                        config.d, query_seed, &model);
    } else {
      data = detail::sample_points(config.distribution, n, config.d, data_seed, nullptr);
      query_set = detail::sample_points(config.distribution, config.queries_per_n,
                                        config.d, query_seed, nullptr);
    }

    if (config.variant == Variant::interior) {
      const KdTree tree = KdTree::build(data);
      report.rows.push_back(detail::run_cell(tree, query_set.points(), config.k));
    } else {
      const BucketTree tree = BucketTree::build(data, config.b);
      report.rows.push_back(detail::run_cell(tree, query_set.points(), config.k));
    }
  }

  if (report.rows.size() >= 2) {
    std::vector<double> log2n, ns, node_means, bucket_means;
    for (const RowStats& row : report.rows) {
      log2n.push_back(std::log2(static_cast<double>(row.n)));
      ns.push_back(static_cast<double>(row.n));
      node_means.push_back(row.nodes_visited.mean);
      bucket_means.push_back(row.buckets_examined.mean);
    }
    report.nodes_vs_log2n = linear_fit(log2n, node_means);
    report.nodes_vs_n = linear_fit(ns, node_means);
    report.buckets_vs_n = linear_fit(ns, bucket_means);
  }
  return report;
}

inline nlohmann::json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

inline nlohmann::json to_json(const FitResult& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r2", fit.r2},
          {"slope_stderr", fit.slope_stderr}};
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const RowStats& row : report.rows) {
    rows.push_back({{"n", row.n},
                    {"nodes_visited", to_json(row.nodes_visited)},
                    {"buckets_examined", to_json(row.buckets_examined)},
                    {"distance_evaluations", to_json(row.distance_evaluations)},
                    {"wall_ms", {{"mean", row.wall_ms_mean}, {"median", row.wall_ms_median}}}});
  }
  nlohmann::json grid = nlohmann::json::array();
  for (const std::size_t n : report.config.n_grid) grid.push_back(n);
  return {{"config",
           {{"distribution", to_string(report.config.distribution)},
            {"n_grid", grid},
            {"d", report.config.d},
            {"k", report.config.k},
            {"b", report.config.b},
            {"queries_per_n", report.config.queries_per_n},
            {"seed", report.config.seed},
            {"variant", to_string(report.config.variant)}}},
          {"rows", rows},
          {"fits",
           {{"nodes_vs_log2n", to_json(report.nodes_vs_log2n)},
            {"nodes_vs_n", to_json(report.nodes_vs_n)},
            {"buckets_vs_n", to_json(report.buckets_vs_n)}}}};
}

/// One CSV row per grid cell. The wall_ms_* columns are timing and excluded
/// from determinism guarantees.
inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "n,nodes_mean,nodes_stddev,buckets_mean,buckets_stddev,"
         "dist_evals_mean,dist_evals_stddev,wall_ms_mean,wall_ms_median\n";
  char buf[64];
  const auto field = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (const RowStats& row : report.rows) {
    out << row.n;
    field(row.nodes_visited.mean);
    field(row.nodes_visited.stddev);
    field(row.buckets_examined.mean);
    field(row.buckets_examined.stddev);
    field(row.distance_evaluations.mean);
    field(row.distance_evaluations.stddev);
    field(row.wall_ms_mean);
    field(row.wall_ms_median);
    out << "\n";
  }
}

}  // namespace kdx::bench
