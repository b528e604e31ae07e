// kdx command-line tool: data generation, tree build/persist, queries,
// theory verification, and benchmark experiments.
//
// Machine-readable JSON goes to stdout; human-readable summaries go to
// stderr. Exit codes: 0 success, 2 input/config error, 3 corrupt tree file.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kdx/kdx.hpp"

namespace {

using nlohmann::json;

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> values;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) throw kdx::ParseError("empty entry in list: " + text);
    values.push_back(static_cast<std::size_t>(std::stoull(token)));
  }
  if (values.empty()) throw kdx::ParseError("empty list: " + text);
  return values;
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
  std::string dist = "uniform-cube";
  std::size_t n = 0;
  std::size_t d = 2;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& args) {
  const auto dist = kdx::bench::distribution_from_string(args.dist);
  const kdx::PointSet points = kdx::bench::generate_points(dist, args.n, args.d, args.seed);
  std::ofstream out(args.out);
  if (!out) throw kdx::ParseError("cannot open output file: " + args.out);
  kdx::write_point_set(out, points);
  out.flush();
  if (!out) throw kdx::ParseError("write failed: " + args.out);
  std::cout << json{{"command", "gen"},
                    {"n", points.size()},
                    {"d", points.dim()},
                    {"path", args.out}}
                   .dump()
            << "\n";
  std::cerr << "wrote " << points.size() << " points (d=" << points.dim()
            << ") to " << args.out << "\n";
  return 0;
}

// -------------------------------------------------------------- build ----

struct BuildArgs {
  std::string in;
  std::string variant = "interior";
  std::uint32_t b = 1;
  std::string out;
};

int cmd_build(const BuildArgs& args) {
  const kdx::PointSet points = kdx::read_point_file(args.in);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw kdx::ParseError("cannot open output file: " + args.out);

  json summary;
  if (kdx::bench::variant_from_string(args.variant) == kdx::bench::Variant::interior) {
    const kdx::KdTree tree = kdx::KdTree::build(points);
    kdx::save_tree(out, tree);
    std::size_t leaves = 0;
    for (std::uint32_t i = 0; i < tree.node_count(); ++i)
      if (tree.node(i).is_leaf()) ++leaves;
    summary = {{"command", "build"}, {"variant", "interior"}, {"n", tree.size()},
               {"depth", tree.depth()}, {"nodes", tree.node_count()}, {"leaves", leaves}};
  } else {
    const kdx::BucketTree tree = kdx::BucketTree::build(points, args.b);
    kdx::save_tree(out, tree);
    summary = {{"command", "build"}, {"variant", "bucket"}, {"n", tree.size()},
               {"b", args.b}, {"depth", tree.depth()}, {"nodes", tree.node_count()},
               {"leaves", tree.leaf_census().size()}};
  }
  out.flush();
  if (!out) throw kdx::ParseError("write failed: " + args.out);
  std::cout << summary.dump() << "\n";
  std::cerr << "built " << args.variant << " tree from " << args.in << " into "
            << args.out << "\n";
  return 0;
}

// -------------------------------------------------------------- query ----

struct QueryArgs {
  std::string in;
  std::string point;
  std::size_t k = 1;
  double eps = kdx::kInfinity;
};

int cmd_query(const QueryArgs& args) {
  const kdx::AnyTree tree = kdx::load_tree_file(args.in);
  const kdx::Point query(kdx::parse_coords(args.point), 0);
  const kdx::KnnResult result = std::visit(
      [&](const auto& t) { return kdx::knn(t, query, args.k, args.eps); }, tree);

  json ids = json::array();
  json distances = json::array();
  for (const kdx::Neighbor& nb : result.neighbors) {
    ids.push_back(nb.id);
    distances.push_back(nb.distance);
  }
  std::cout << json{{"command", "query"},
                    {"k", args.k},
                    {"eps", args.eps == kdx::kInfinity ? json("inf") : json(args.eps)},
                    {"ids", ids},
                    {"distances", distances},
                    {"stats",
                     {{"nodes_visited", result.stats.nodes_visited},
                      {"buckets_examined", result.stats.buckets_examined},
                      {"distance_evaluations", result.stats.distance_evaluations}}}}
                   .dump()
            << "\n";
  std::cerr << result.neighbors.size() << " neighbor(s) found\n";
  return 0;
}

// ------------------------------------------------------------- verify ----

struct Check {
  std::string suite;
  std::string name;
  std::string kind;  // "abs": |measured-expected| <= tolerance; "ge"/"gt": one-sided
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

Check abs_check(std::string suite, std::string name, double measured,
                double expected, double tolerance) {
  Check c{std::move(suite), std::move(name), "abs", measured, expected, tolerance};
  c.pass = std::abs(measured - expected) <= tolerance;
  return c;
}

Check ge_check(std::string suite, std::string name, double measured, double bound) {
  Check c{std::move(suite), std::move(name), "ge", measured, bound, 0.0};
  c.pass = measured >= bound;
  return c;
}

Check gt_check(std::string suite, std::string name, double measured, double bound) {
  Check c{std::move(suite), std::move(name), "gt", measured, bound, 0.0};
  c.pass = measured > bound;
  return c;
}

void suite_beta(std::uint64_t seed, std::int64_t draws, std::vector<Check>& checks) {
  double max_dev = 0.0;
  for (int n = 1; n <= 30; ++n)
    for (int k = 1; k <= n; ++k)
      for (int ci = 0; ci <= 10; ++ci) {
        const double c = 0.1 * ci;
        max_dev = std::max(max_dev,
                           std::abs(kdx::theory::beta_order_cdf(k, n, c) -
                                    kdx::theory::beta_order_cdf_by_quadrature(k, n, c)));
      }
  checks.push_back(abs_check("beta", "cdf_binomial_vs_quadrature_max_dev", max_dev, 0.0, 1e-10));

  double uniform_dev = 0.0;
  for (int ci = 0; ci <= 10; ++ci) {
    const double c = 0.1 * ci;
    uniform_dev = std::max(uniform_dev, std::abs(kdx::theory::beta_order_cdf(1, 1, c) - c));
  }
  checks.push_back(abs_check("beta", "beta_1_1_cdf_is_identity", uniform_dev, 0.0, 0.0));

  const std::pair<int, int> pairs[] = {{1, 1}, {3, 5}, {10, 19}};
  for (const auto& [k, n] : pairs) {
    const auto sample = kdx::theory::monte_carlo_order_stat(
        k, n, draws, kdx::derive_seed(seed, "verify-beta"));
    const double expected = kdx::theory::beta_mean(k, n - k + 1);
    checks.push_back(abs_check("beta",
                               "order_stat_mean_k" + std::to_string(k) + "_n" + std::to_string(n),
                               sample.estimate, expected, 4.0 * sample.std_error));
  }
}

void suite_content(std::uint64_t seed, std::int64_t queries, std::vector<Check>& checks) {
  const std::pair<int, int> configs[] = {{9, 5}, {99, 1}, {49, 10}};  // (n, k)
  for (const auto& [n, k] : configs) {
    const auto sample = kdx::theory::monte_carlo_probability_content(
        {kdx::theory::Density::uniform_cube, 2}, n, k, queries,
        kdx::derive_seed(seed, "verify-content"));
    const double expected = kdx::theory::expected_probability_content(k, n);
    const std::string tag = "_n" + std::to_string(n) + "_k" + std::to_string(k);
    checks.push_back(abs_check("content", "mean_within_4se" + tag, sample.estimate,
                               expected, 4.0 * sample.std_error));
    checks.push_back(abs_check("content", "mean_within_0.02" + tag, sample.estimate,
                               expected, 0.02));
  }
}

void suite_bounds(std::vector<Check>& checks) {
  checks.push_back(abs_check("bounds", "cube_ball_ratio_d1_exact",
                             kdx::theory::cube_ball_ratio(1), 1.0, 0.0));
  checks.push_back(abs_check("bounds", "cube_ball_ratio_d2",
                             kdx::theory::cube_ball_ratio(2), 4.0 / kdx::theory::kPi, 1e-12));
  checks.push_back(abs_check("bounds", "cube_ball_ratio_d3",
                             kdx::theory::cube_ball_ratio(3), 6.0 / kdx::theory::kPi, 1e-12));

  double records_dev = 0.0;
  for (int d = 1; d <= 10; ++d)
    records_dev = std::max(records_dev, std::abs(kdx::theory::records_bound(1, 1, d) -
                                                 std::ldexp(1.0, d)));
  checks.push_back(abs_check("bounds", "records_bound_1_1_is_2_pow_d", records_dev, 0.0, 0.0));

  checks.push_back(abs_check("bounds", "expected_content_5_9",
                             kdx::theory::expected_probability_content(5, 9), 0.5, 0.0));

  double min_margin = kdx::kInfinity;
  for (int d = 1; d <= 10; ++d)
    for (std::int64_t k = 1; k <= 64; ++k)
      min_margin = std::min(min_margin, kdx::theory::records_bound(k, 1, d) -
                                            kdx::theory::bucket_overlap_bound(k, 1, d));
  checks.push_back(ge_check("bounds", "records_bound_covers_overlap_bound", min_margin, 0.0));
}

kdx::bench::ExperimentReport constancy_sweep(std::uint64_t seed, std::size_t queries) {
  kdx::bench::ExperimentConfig config;
  config.distribution = kdx::bench::Distribution::uniform_cube;
  config.n_grid = {1u << 10, 1u << 12, 1u << 14, 1u << 16, 1u << 18};
  config.d = 2;
  config.k = 1;
  config.b = 1;
  config.queries_per_n = queries;
  config.seed = kdx::derive_seed(seed, "verify-sweep");
  config.variant = kdx::bench::Variant::bucket;
  return kdx::bench::run_experiment(config);
}

void suite_constancy(const kdx::bench::ExperimentReport& report, std::vector<Check>& checks) {
  checks.push_back(abs_check("constancy", "buckets_slope_vs_n_within_2se",
                             report.buckets_vs_n.slope, 0.0,
                             2.0 * report.buckets_vs_n.slope_stderr));
  double lo = kdx::kInfinity, hi = -kdx::kInfinity;
  for (const auto& row : report.rows) {
    lo = std::min(lo, row.buckets_examined.mean);
    hi = std::max(hi, row.buckets_examined.mean);
  }
  checks.push_back(abs_check("constancy", "buckets_mean_spread_ratio", hi / lo, 1.0, 0.25));
}

void suite_logcost(const kdx::bench::ExperimentReport& report, std::vector<Check>& checks) {
  checks.push_back(ge_check("logcost", "nodes_vs_log2n_r2", report.nodes_vs_log2n.r2, 0.95));
  checks.push_back(gt_check("logcost", "log_model_beats_linear_model",
                            report.nodes_vs_log2n.r2 - report.nodes_vs_n.r2, 0.0));
}

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::int64_t queries = 10000;  // content queries
  std::int64_t draws = 100000;   // order-stat draws
  std::size_t sweep_queries = 500;
};

int cmd_verify(const VerifyArgs& args) {
  const bool all = args.suite == "all";
  std::vector<Check> checks;

  if (all || args.suite == "beta") suite_beta(args.seed, args.draws, checks);
  if (all || args.suite == "content") suite_content(args.seed, args.queries, checks);
  if (all || args.suite == "bounds") suite_bounds(checks);
  if (all || args.suite == "constancy" || args.suite == "logcost") {
    const auto report = constancy_sweep(args.seed, args.sweep_queries);
    if (all || args.suite == "constancy") suite_constancy(report, checks);
    if (all || args.suite == "logcost") suite_logcost(report, checks);
  }
  if (checks.empty()) throw kdx::ParseError("unknown suite: " + args.suite);

  bool all_pass = true;
  for (const Check& c : checks) {
    all_pass = all_pass && c.pass;
    std::cout << json{{"suite", c.suite},     {"check", c.name},
                      {"kind", c.kind},       {"measured", c.measured},
                      {"expected", c.expected}, {"tolerance", c.tolerance},
                      {"pass", c.pass}}
                     .dump()
              << "\n";
  }
  std::size_t passed = 0;
  for (const Check& c : checks) passed += c.pass ? 1 : 0;
  std::cerr << "verify: " << passed << "/" << checks.size() << " checks passed\n";
  return all_pass ? 0 : 1;
}

// -------------------------------------------------------------- bench ----

struct BenchArgs {
  std::string config_path;
  std::string dist = "uniform-cube";
  std::string n_list = "1024,4096,16384";
  std::size_t d = 2;
  std::size_t k = 1;
  std::uint32_t b = 1;
  std::string variant = "bucket";
  std::size_t queries = 500;
  std::uint64_t seed = 0;
  std::string out = "bench";
};

kdx::bench::ExperimentConfig bench_config(const BenchArgs& args) {
  kdx::bench::ExperimentConfig config;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw kdx::ParseError("cannot open config file: " + args.config_path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw kdx::ParseError(std::string("bad config JSON: ") + e.what());
    }
    try {
      config.distribution =
          kdx::bench::distribution_from_string(doc.at("distribution").get<std::string>());
      config.n_grid = doc.at("n_grid").get<std::vector<std::size_t>>();
      config.d = doc.at("d").get<std::size_t>();
      config.k = doc.at("k").get<std::size_t>();
      config.b = doc.at("b").get<std::uint32_t>();
      config.queries_per_n = doc.at("queries_per_n").get<std::size_t>();
      config.seed = doc.at("seed").get<std::uint64_t>();
      config.variant = kdx::bench::variant_from_string(doc.at("variant").get<std::string>());
    } catch (const json::exception& e) {
      throw kdx::ParseError(std::string("bad config JSON: ") + e.what());
    }
    return config;
  }
  config.distribution = kdx::bench::distribution_from_string(args.dist);
  config.n_grid = parse_size_list(args.n_list);
  config.d = args.d;
  config.k = args.k;
  config.b = args.b;
  config.queries_per_n = args.queries;
  config.seed = args.seed;
  config.variant = kdx::bench::variant_from_string(args.variant);
  return config;
}

int cmd_bench(const BenchArgs& args) {
  const auto config = bench_config(args);
  const auto report = kdx::bench::run_experiment(config);

  const std::string json_path = args.out + ".json";
  const std::string csv_path = args.out + ".csv";
  {
    std::ofstream out(json_path);
    if (!out) throw kdx::ParseError("cannot open output file: " + json_path);
    out << kdx::bench::to_json(report).dump(2) << "\n";
  }
  {
    std::ofstream out(csv_path);
    if (!out) throw kdx::ParseError("cannot open output file: " + csv_path);
    kdx::bench::write_csv(out, report);
  }
  std::cout << json{{"command", "bench"},
                    {"json", json_path},
                    {"csv", csv_path},
                    {"rows", report.rows.size()},
                    {"log2_slope", report.nodes_vs_log2n.slope},
                    {"log2_r2", report.nodes_vs_log2n.r2},
                    {"buckets_slope", report.buckets_vs_n.slope}}
                   .dump()
            << "\n";
  std::cerr << "bench: " << report.rows.size() << " grid cells -> " << json_path
            << ", " << csv_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kdx: k-d tree spatial index with instrumented kNN search,\n"
               "theory verification, and benchmark experiments"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a point file");
  gen->add_option("--dist", gen_args.dist, "uniform-cube | gaussian | clustered");
  gen->add_option("--n", gen_args.n, "number of points")->required();
  gen->add_option("--d", gen_args.d, "dimension");
  gen->add_option("--seed", gen_args.seed, "random seed");
  gen->add_option("--out", gen_args.out, "output point file")->required();

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "Build a tree from a point file");
  build->add_option("--in", build_args.in, "input point file")->required();
  build->add_option("--variant", build_args.variant, "interior | bucket");
  build->add_option("--b", build_args.b, "bucket capacity (bucket variant)");
  build->add_option("--out", build_args.out, "output KDX1 tree file")->required();

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "k-nearest-neighbor query against a tree file");
  query->add_option("--in", query_args.in, "KDX1 tree file")->required();
  query->add_option("--point", query_args.point, "query point, comma-separated")->required();
  query->add_option("--k", query_args.k, "neighbors sought");
  query->add_option("--eps", query_args.eps, "distance bound (default: unbounded)");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run the theory verification checks");
  verify->add_option("--suite", verify_args.suite,
                     "all | beta | content | bounds | constancy | logcost");
  verify->add_option("--seed", verify_args.seed, "random seed");
  verify->add_option("--queries", verify_args.queries, "probability-content query count");
  verify->add_option("--draws", verify_args.draws, "order-statistic draw count");
  verify->add_option("--sweep-queries", verify_args.sweep_queries,
                     "queries per grid cell for constancy/logcost");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Run a benchmark experiment");
  bench->add_option("--config", bench_args.config_path,
                    "JSON config file (overrides the other flags)");
  bench->add_option("--dist", bench_args.dist, "uniform-cube | gaussian | clustered");
  bench->add_option("--n", bench_args.n_list, "comma-separated n grid");
  bench->add_option("--d", bench_args.d, "dimension");
  bench->add_option("--k", bench_args.k, "neighbors sought");
  bench->add_option("--b", bench_args.b, "bucket capacity");
  bench->add_option("--variant", bench_args.variant, "interior | bucket");
  bench->add_option("--queries", bench_args.queries, "queries per grid cell");
  bench->add_option("--seed", bench_args.seed, "random seed");
  bench->add_option("--out", bench_args.out, "output path prefix");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen(gen_args);
    if (build->parsed()) return cmd_build(build_args);
    if (query->parsed()) return cmd_query(query_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const kdx::TreeFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
