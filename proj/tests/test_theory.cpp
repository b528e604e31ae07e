#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kdx/theory.hpp"

using namespace kdx;
using namespace kdx::theory;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gamma_half_integer: exact recurrence values") {
  CHECK(gamma_half_integer(1.0) == 1.0);
  CHECK(gamma_half_integer(2.0) == 1.0);
  CHECK(gamma_half_integer(5.0) == 24.0);
  CHECK(gamma_half_integer(0.5) == kSqrtPi);
  CHECK(gamma_half_integer(1.5) == 0.5 * kSqrtPi);
  CHECK(gamma_half_integer(2.5) == 0.75 * kSqrtPi);
  CHECK_THROWS_AS(gamma_half_integer(1.25), std::invalid_argument);
  CHECK_THROWS_AS(gamma_half_integer(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_half_integer(-1.5), std::invalid_argument);
}

TEST_CASE("gamma: Lanczos agrees with the half-integer recurrence") {
  for (int twice = 1; twice <= 40; ++twice) {
    const double x = 0.5 * twice;
    CHECK_THAT(lanczos_gamma(x), WithinRel(gamma_half_integer(x), 1e-12));
    CHECK_THAT(std::tgamma(x), WithinRel(gamma_half_integer(x), 1e-12));
  }
}

TEST_CASE("cube_ball_ratio: spot values") {
  CHECK(cube_ball_ratio(1) == 1.0);  // exact
  CHECK_THAT(cube_ball_ratio(2), WithinAbs(4.0 / kPi, 1e-15));
  CHECK_THAT(cube_ball_ratio(2), WithinAbs(1.27324, 1e-5));
  CHECK_THAT(cube_ball_ratio(3), WithinAbs(6.0 / kPi, 1e-15));
  CHECK_THAT(cube_ball_ratio(3), WithinAbs(1.90986, 1e-5));
  CHECK_THROWS_AS(cube_ball_ratio(0), std::invalid_argument);
}

TEST_CASE("cube_ball_ratio: strictly increasing, and G(d)*ball volume = 2^d") {
  double previous = 0.0;
  for (int d = 1; d <= 15; ++d) {
    const double g = cube_ball_ratio(d);
    CHECK(g > previous);
    previous = g;
  }
  for (int d = 1; d <= 10; ++d)
    CHECK_THAT(cube_ball_ratio(d) * unit_ball_volume(d),
               WithinRel(std::ldexp(1.0, d), 1e-12));
}

TEST_CASE("bucket_overlap_bound") {
  CHECK(bucket_overlap_bound(1, 1, 2) == 4.0);
  CHECK(bucket_overlap_bound(8, 1, 3) == 27.0);  // floor(8^(1/3)) must be 2
  CHECK(bucket_overlap_bound(27, 1, 3) == 64.0);
  CHECK(bucket_overlap_bound(26, 1, 3) == 27.0);
  for (int d = 1; d <= 6; ++d) {
    CHECK(bucket_overlap_bound(5, 5, d) == std::ldexp(1.0, d));  // k = b
    CHECK(bucket_overlap_bound(2, 8, d) == std::ldexp(1.0, d));  // k < b
  }
  CHECK(bucket_overlap_bound(9, 2, 2) == 9.0);  // floor(sqrt(4.5)) = 2
  CHECK(bucket_overlap_bound(2, 8, 2, EdgeRatioMode::query_dominates) == 1.0);
  CHECK(bucket_overlap_bound(8, 1, 3, EdgeRatioMode::bucket_dominates) == 8.0);
  CHECK_THROWS_AS(bucket_overlap_bound(0, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(bucket_overlap_bound(1, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(bucket_overlap_bound(1, 1, 0), std::invalid_argument);
}

TEST_CASE("records_bound") {
  for (int d = 1; d <= 10; ++d)
    CHECK(records_bound(1, 1, d) == std::ldexp(1.0, d));  // (1+1)^d, exact
  CHECK_THAT(records_bound(8, 1, 3), WithinRel(27.0, 1e-12));
  CHECK_THAT(records_bound(4, 1, 2), WithinRel(9.0, 1e-12));
  CHECK_THROWS_AS(records_bound(1, 1, 0), std::invalid_argument);
}

TEST_CASE("records_bound dominates bucket_overlap_bound at b = 1") {
  for (int d = 1; d <= 10; ++d)
    for (std::int64_t k = 1; k <= 64; ++k)
      CHECK(records_bound(k, 1, d) >= bucket_overlap_bound(k, 1, d));
}

TEST_CASE("expected_probability_content") {
  CHECK(expected_probability_content(1, 1) == 0.5);
  CHECK(expected_probability_content(5, 9) == 0.5);
  CHECK(expected_probability_content(1, 99) == 0.01);
  CHECK_THROWS_AS(expected_probability_content(10, 9), std::invalid_argument);
  CHECK_THROWS_AS(expected_probability_content(0, 9), std::invalid_argument);
}

TEST_CASE("beta_mean") {
  CHECK(beta_mean(1, 1) == 0.5);
  CHECK(beta_mean(2, 3) == 0.4);
  // composition with the order-statistic parameters: a=k, b=n-k+1
  for (int n = 1; n <= 20; ++n)
    for (int k = 1; k <= n; ++k)
      CHECK(beta_mean(k, n - k + 1) == expected_probability_content(k, n));
  CHECK_THROWS_AS(beta_mean(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(beta_mean(1, -2), std::invalid_argument);
}

TEST_CASE("beta_order_cdf: closed-form spot values") {
  CHECK(beta_order_cdf(1, 1, 0.3) == 0.3);  // beta_{1,1} is uniform
  CHECK(beta_order_cdf(1, 2, 0.5) == 0.75);  // 2c - c^2
  CHECK(beta_order_cdf(3, 7, 1.0) == 1.0);
  CHECK(beta_order_cdf(3, 7, 0.0) == 0.0);
  for (int ci = 0; ci <= 10; ++ci)
    CHECK(beta_order_cdf(1, 1, 0.1 * ci) == 0.1 * ci);
  CHECK_THROWS_AS(beta_order_cdf(0, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(beta_order_cdf(3, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(beta_order_cdf(1, 2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(beta_order_cdf(1, 2, -0.1), std::invalid_argument);
}

TEST_CASE("beta_order_cdf: monotone in c, decreasing in k") {
  for (int n = 1; n <= 12; ++n) {
    for (int k = 1; k <= n; ++k) {
      double previous = -1.0;
      for (int ci = 0; ci <= 20; ++ci) {
        const double value = beta_order_cdf(k, n, 0.05 * ci);
        CHECK(value >= previous - 1e-15);
        previous = value;
      }
    }
    for (int k = 1; k < n; ++k)
      CHECK(beta_order_cdf(k, n, 0.37) >= beta_order_cdf(k + 1, n, 0.37));
  }
}

TEST_CASE("beta_order_cdf: binomial sum agrees with quadrature") {
  double max_dev = 0.0;
  for (int n = 1; n <= 14; ++n)
    for (int k = 1; k <= n; ++k)
      for (int ci = 0; ci <= 10; ++ci) {
        const double c = 0.1 * ci;
        max_dev = std::max(max_dev, std::abs(beta_order_cdf(k, n, c) -
                                             beta_order_cdf_by_quadrature(k, n, c)));
      }
  INFO("max |sum - quadrature| = " << max_dev);
  CHECK(max_dev <= 1e-10);
}

TEST_CASE("monte_carlo_order_stat: estimates the beta mean") {
  const std::pair<int, int> pairs[] = {{1, 1}, {3, 5}, {10, 19}, {2, 7}, {7, 7}};
  for (const auto& [k, n] : pairs) {
    const auto sample = monte_carlo_order_stat(k, n, 100000, 99);
    const double expected = beta_mean(k, n - k + 1);
    INFO("k=" << k << " n=" << n << " estimate=" << sample.estimate
              << " se=" << sample.std_error);
    CHECK(sample.std_error > 0.0);
    CHECK(std::abs(sample.estimate - expected) <= 4.0 * sample.std_error);
  }
}

TEST_CASE("monte_carlo_order_stat: deterministic for a fixed seed") {
  const auto a = monte_carlo_order_stat(3, 5, 2000, 1234);
  const auto b = monte_carlo_order_stat(3, 5, 2000, 1234);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  const auto c = monte_carlo_order_stat(3, 5, 2000, 1235);
  CHECK(a.estimate != c.estimate);
  CHECK_THROWS_AS(monte_carlo_order_stat(3, 2, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo_order_stat(1, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("monte_carlo_probability_content: single query is reproducible") {
  const DensitySpec uniform_square{Density::uniform_cube, 2};
  const auto a = monte_carlo_probability_content(uniform_square, 9, 5, 1, 42, 2000);
  const auto b = monte_carlo_probability_content(uniform_square, 9, 5, 1, 42, 2000);
  CHECK(a.estimate == b.estimate);
  CHECK(a.estimate >= 0.0);
  CHECK(a.estimate <= 1.0);
  CHECK(a.std_error == 0.0);  // one sample
}

TEST_CASE("monte_carlo_probability_content: approaches k/(n+1)", "[slow]") {
  const DensitySpec uniform_square{Density::uniform_cube, 2};

  SECTION("n=9, k=5") {
    const auto sample = monte_carlo_probability_content(uniform_square, 9, 5, 400, 7, 20000);
    INFO("estimate=" << sample.estimate << " se=" << sample.std_error);
    CHECK(std::abs(sample.estimate - 0.5) <= 4.0 * sample.std_error);
  }
  SECTION("k = n: content approaches n/(n+1)") {
    const auto sample = monte_carlo_probability_content(uniform_square, 5, 5, 400, 8, 20000);
    INFO("estimate=" << sample.estimate << " se=" << sample.std_error);
    CHECK(std::abs(sample.estimate - 5.0 / 6.0) <= 4.0 * sample.std_error);
  }
}

TEST_CASE("monte_carlo_probability_content: validation") {
  const DensitySpec uniform_square{Density::uniform_cube, 2};
  CHECK_THROWS_AS(
      monte_carlo_probability_content({static_cast<Density>(99), 2}, 9, 5, 1, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      monte_carlo_probability_content({Density::uniform_cube, 0}, 9, 5, 1, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo_probability_content(uniform_square, 4, 5, 1, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo_probability_content(uniform_square, 9, 5, 0, 0),
                  std::invalid_argument);
}
