#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdx/oracle.hpp"
#include "kdx/point.hpp"
#include "kdx/rng.hpp"

// Closed-form quantities from the expected-logarithmic-time analysis of k-d
// tree search, and the Monte Carlo estimators used to confirm them:
// cube/ball volume ratio G(d), bucket-overlap and records-examined bounds,
// the order-statistic (beta) distribution, and the expected probability
// content k/(n+1) of the k-th-neighbor ball.

namespace kdx::theory {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrtPi = 1.772453850905516027298167483341145183;

namespace detail {

// x^e for small non-negative integer e, by repeated multiplication. Exact
// for e == 0 and e == 1, which std::pow does not guarantee.
inline double pow_int(double x, std::int64_t e) {
  double result = 1.0;
  double base = x;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

// pi^(d/2), built so that odd d shares the exact sqrt(pi) factor used by
// the half-integer gamma below; this makes ratios like G(1) cancel to 1.
inline double pi_half_power(int d) {
  double v = pow_int(kPi, d / 2);
  if (d % 2 != 0) v *= kSqrtPi;
  return v;
}

}  // namespace detail

/// Gamma(x) for x a positive integer or half-integer, by the exact
/// recurrence Gamma(x+1) = x*Gamma(x) down to Gamma(1) = 1 or
/// Gamma(1/2) = sqrt(pi). Exact up to rounding of the running product.
inline double gamma_half_integer(double x) {
  if (!(x > 0.0) || std::nearbyint(2.0 * x) != 2.0 * x)
    throw std::invalid_argument("gamma_half_integer: argument must be a positive multiple of 1/2");
  double result = 1.0;
  while (x > 1.0) {
    x -= 1.0;
    result *= x;
  }
  if (x == 0.5) result *= kSqrtPi;
  return result;
}

/// Gamma(x) by the Lanczos approximation (g = 7, 9 terms), valid for x > 0.
/// Kept as the independent cross-check for gamma_half_integer.
inline double lanczos_gamma(double x) {
  static constexpr double coeff[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection formula.
    return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
  }
  x -= 1.0;
  double a = coeff[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeff[i] / (x + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

/// Volume of the unit ball in R^d: pi^(d/2) / Gamma(d/2 + 1).
inline double unit_ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("unit_ball_volume: d must be >= 1");
  return detail::pi_half_power(d) / gamma_half_integer(d / 2.0 + 1.0);
}

/// G(d): volume ratio of a d-cube to its inscribed d-ball,
/// 2^d * Gamma(d/2 + 1) / pi^(d/2). Strictly increasing in d; G(1) = 1.
inline double cube_ball_ratio(int d) {
  if (d < 1) throw std::invalid_argument("cube_ball_ratio: d must be >= 1");
  return detail::pow_int(2.0, d) * gamma_half_integer(d / 2.0 + 1.0) /
         detail::pi_half_power(d);
}

namespace detail {

// Largest r >= 0 with r^d * b <= k, in exact integer arithmetic.
inline std::int64_t floor_ratio_root(std::int64_t k, std::int64_t b, int d) {
  const auto fits = [&](std::int64_t r) {
    unsigned __int128 acc = 1;
    for (int i = 0; i < d; ++i) {
      acc *= static_cast<unsigned __int128>(r);
      if (acc > static_cast<unsigned __int128>(k)) return false;
    }
    return acc * static_cast<unsigned __int128>(b) <=
           static_cast<unsigned __int128>(k);
  };
  auto r = static_cast<std::int64_t>(
      std::floor(std::pow(static_cast<double>(k) / static_cast<double>(b),
                          1.0 / static_cast<double>(d))));
  r = std::max<std::int64_t>(r - 2, 0);
  while (fits(r + 1)) ++r;
  return r;
}

inline void check_params(std::int64_t k, std::int64_t b, int d) {
  if (k < 1 || b < 1 || d < 1)
    throw std::invalid_argument("theory: k, b, d must all be >= 1");
}

}  // namespace detail

/// How the bucket-to-query edge-length comparison in the overlap bound is
/// resolved: from k vs b (the equal-local-density simplification), or forced
/// to one branch.
enum class EdgeRatioMode { automatic, query_dominates, bucket_dominates };

/// Upper bound L on the number of buckets overlapping the query hypercube:
/// (floor((k/b)^(1/d)) + 1)^d when buckets are no larger than the query
/// cube, 2^d otherwise.
inline double bucket_overlap_bound(std::int64_t k, std::int64_t b, int d,
                                   EdgeRatioMode mode = EdgeRatioMode::automatic) {
  detail::check_params(k, b, d);
  const bool query_larger =
      mode == EdgeRatioMode::automatic ? k >= b : mode == EdgeRatioMode::query_dominates;
  if (!query_larger) return detail::pow_int(2.0, d);
  const std::int64_t r = detail::floor_ratio_root(k, b, d);
  return detail::pow_int(static_cast<double>(r + 1), d);
}

/// Upper bound on records examined: (k^(1/d) + b^(1/d))^d. Minimized at
/// b = 1, where it becomes (k^(1/d) + 1)^d, independent of n.
inline double records_bound(std::int64_t k, std::int64_t b, int d) {
  detail::check_params(k, b, d);
  const double inv_d = 1.0 / static_cast<double>(d);
  return detail::pow_int(std::pow(static_cast<double>(k), inv_d) +
                             std::pow(static_cast<double>(b), inv_d),
                         d);
}

/// Expected probability content of any region enclosing exactly k of n
/// points: k/(n+1).
inline double expected_probability_content(std::int64_t k, std::int64_t n) {
  if (k < 1 || n < 1 || k > n)
    throw std::invalid_argument("expected_probability_content: need 1 <= k <= n");
  return static_cast<double>(k) / static_cast<double>(n + 1);
}

/// Mean of the beta distribution: a/(a+b).
inline double beta_mean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("beta_mean: parameters must be positive");
  return a / (a + b);
}

namespace detail {

inline void check_order_stat(int k, int n) {
  if (k < 1 || n < 1 || k > n)
    throw std::invalid_argument("order statistic: need 1 <= k <= n");
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// C(n, k) as a double via the usual running product.
inline double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i)
    v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
  return v;
}

}  // namespace detail

/// P(T_{k:n} <= c): CDF of the k-th smallest of n uniform(0,1) variates,
/// evaluated through the closed-form binomial sum
/// sum_{j=k}^{n} C(n,j) c^j (1-c)^(n-j).
inline double beta_order_cdf(int k, int n, double c) {
  detail::check_order_stat(k, n);
  if (!(c >= 0.0) || !(c <= 1.0))
    throw std::invalid_argument("beta_order_cdf: c must lie in [0, 1]");
  double sum = 0.0;
  double binom = detail::binomial(n, k);
  for (int j = k; j <= n; ++j) {
    sum += binom * detail::pow_int(c, j) * detail::pow_int(1.0 - c, n - j);
    binom = binom * static_cast<double>(n - j) / static_cast<double>(j + 1);
  }
  return sum;
}

/// The same CDF through adaptive quadrature of the density integral
/// n!/((k-1)!(n-k)!) * int_0^c s^(k-1) (1-s)^(n-k) ds. This is the
/// independent route the binomial sum is verified against.
inline double beta_order_cdf_by_quadrature(int k, int n, double c,
                                           double tol = 1e-12) {
  detail::check_order_stat(k, n);
  if (!(c >= 0.0) || !(c <= 1.0))
    throw std::invalid_argument("beta_order_cdf_by_quadrature: c must lie in [0, 1]");
  const double coefficient = static_cast<double>(k) * detail::binomial(n, k);
  const auto density = [&](double s) {
    return detail::pow_int(s, k - 1) * detail::pow_int(1.0 - s, n - k);
  };
  return coefficient * detail::adaptive_simpson(density, 0.0, c, tol);
}

/// A Monte Carlo estimate with its sampling uncertainty.
struct OrderStatSample {
  int n = 0;
  int k = 0;
  std::int64_t draws = 0;
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Estimates E[T_{k:n}] empirically: `draws` batches of n uniform(0,1)
/// variates, k-th order statistic of each. Reproducible for a fixed seed;
/// the estimate converges on beta_mean(k, n-k+1) = k/(n+1).
inline OrderStatSample monte_carlo_order_stat(int k, int n, std::int64_t draws,
                                              std::uint64_t seed) {
  detail::check_order_stat(k, n);
  if (draws < 1)
    throw std::invalid_argument("monte_carlo_order_stat: draws must be >= 1");
  Xoshiro256pp rng(derive_seed(seed, "order-stat"));
  std::vector<double> batch(static_cast<std::size_t>(n));
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    for (double& v : batch) v = uniform01(rng);
    std::nth_element(batch.begin(), batch.begin() + (k - 1), batch.end());
    const double value = batch[static_cast<std::size_t>(k - 1)];
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  OrderStatSample out;
  out.n = n;
  out.k = k;
  out.draws = draws;
  out.estimate = mean;
  out.std_error = draws > 1 ? std::sqrt(m2 / (static_cast<double>(draws - 1) *
                                              static_cast<double>(draws)))
                            : 0.0;
  return out;
}

/// Densities supported by monte_carlo_probability_content.
enum class Density { uniform_cube };

struct DensitySpec {
  Density kind = Density::uniform_cube;
  int dim = 2;
};

namespace detail {

// Uniform sample from the unit d-ball: rejection from the enclosing cube in
// low dimensions, normalized Gaussian direction with a u^(1/d) radius above.
inline void sample_unit_ball(int d, Xoshiro256pp& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(d));
  if (d <= 4) {
    while (true) {
      double norm2 = 0.0;
      for (double& v : out) {
        v = 2.0 * uniform01(rng) - 1.0;
        norm2 += v * v;
      }
      if (norm2 <= 1.0) return;
    }
  }
  double norm2 = 0.0;
  for (double& v : out) {
    v = standard_normal(rng);
    norm2 += v * v;
  }
  const double norm = std::sqrt(norm2);
  const double radius = std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
  for (double& v : out) v = v / norm * radius;
}

}  // namespace detail

/// Empirical check of the k/(n+1) law: repeatedly samples n points and a
/// query from the density, measures the k-th-neighbor ball's true
/// probability content, and averages. Content is closed-form when the ball
/// lies inside the unit cube; near the boundary it is estimated by
/// `clip_draws` sub-sampled Monte Carlo points from a per-query sub-seed.
inline OrderStatSample monte_carlo_probability_content(
    const DensitySpec& density, int n, int k, std::int64_t queries,
    std::uint64_t seed, std::int64_t clip_draws = 100000) {
  if (density.kind != Density::uniform_cube)
    throw std::invalid_argument("monte_carlo_probability_content: unsupported density");
  const int d = density.dim;
  if (d < 1)
    throw std::invalid_argument("monte_carlo_probability_content: dim must be >= 1");
  detail::check_order_stat(k, n);
  if (queries < 1 || clip_draws < 1)
    throw std::invalid_argument("monte_carlo_probability_content: counts must be >= 1");

  const double ball_volume = unit_ball_volume(d);
  double mean = 0.0, m2 = 0.0;
  std::vector<double> offset;
  for (std::int64_t q = 0; q < queries; ++q) {
    const std::uint64_t query_seed = derive_seed(seed, static_cast<std::uint64_t>(q));
    Xoshiro256pp rng(query_seed);

    PointSet points(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
      std::vector<double> coords(static_cast<std::size_t>(d));
      for (double& c : coords) c = uniform01(rng);
      points.add(Point(std::move(coords), static_cast<std::uint32_t>(i)));
    }
    Point query(std::vector<double>(static_cast<std::size_t>(d)),
                static_cast<std::uint32_t>(n));
    for (double& c : query.coords) c = uniform01(rng);

    const double radius =
        brute_force_knn(points, query, static_cast<std::size_t>(k)).back().distance;

    bool inside = true;
    for (const double c : query.coords)
      if (c - radius < 0.0 || c + radius > 1.0) {
        inside = false;
        break;
      }

    double content;
    if (inside) {
      content = ball_volume * detail::pow_int(radius, d);
    } else {
      Xoshiro256pp clip_rng(derive_seed(query_seed, "clip"));
      std::int64_t hits = 0;
      for (std::int64_t s = 0; s < clip_draws; ++s) {
        detail::sample_unit_ball(d, clip_rng, offset);
        bool in_cube = true;
        for (int c = 0; c < d; ++c) {
          const double y = query.coords[static_cast<std::size_t>(c)] +
                           radius * offset[static_cast<std::size_t>(c)];
          if (y < 0.0 || y > 1.0) {
            in_cube = false;
            break;
          }
        }
        if (in_cube) ++hits;
      }
      content = ball_volume * detail::pow_int(radius, d) *
                static_cast<double>(hits) / static_cast<double>(clip_draws);
    }

    const double delta = content - mean;
    mean += delta / static_cast<double>(q + 1);
    m2 += delta * (content - mean);
  }

  OrderStatSample out;
  out.n = n;
  out.k = k;
  out.draws = queries;
  out.estimate = mean;
  out.std_error = queries > 1 ? std::sqrt(m2 / (static_cast<double>(queries - 1) *
                                                static_cast<double>(queries)))
                              : 0.0;
  return out;
}

}  // namespace kdx::theory
