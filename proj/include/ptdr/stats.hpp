#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ptdr {

struct PointXY {
  double x;
  double y;
};

// Linear fit at quantile q: y ~ intercept + slope * x.
struct RegressionLine {
  double intercept = 0;
  double slope = 0;
  double quantile = 0.5;
  int point_count = 0;

  double at(double x) const { return intercept + slope * x; }
};

// Percentiles reported by every travel-time summary in this project.
inline constexpr std::array<double, 7> kKeyPercentiles = {5, 10, 25, 50, 75, 90, 95};

struct SummaryStats {
  double mean = 0;
  double stddev = 0;  // sample standard deviation (n-1), 0 when n == 1
  double cov = 0;     // stddev / mean
  std::array<double, 7> percentiles{};  // at kKeyPercentiles

  static SummaryStats from_samples(std::span<const double> samples);
};

// y-th percentile with linear interpolation at rank h = (n-1) * y / 100.
// y must lie in (0, 100); the input need not be sorted.
double percentile(std::span<const double> samples, double y);
double percentile_sorted(std::span<const double> sorted, double y);

// Coefficient of variation: sample standard deviation over mean.
// Requires at least two samples and a positive mean.
double coeff_variation(std::span<const double> samples);

// Spearman rank correlation; ties receive average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Two-sided permutation test for Spearman's rho (shuffles ys).
double spearman_permutation_pvalue(std::span<const double> xs, std::span<const double> ys,
                                   int permutations, std::uint64_t seed);

// Pinball loss of the line y = a + b*x at quantile q over the points.
double pinball_loss(std::span<const PointXY> points, double q, double a, double b);

// Exact quantile regression by candidate-pair enumeration: an optimal
// two-parameter line interpolates two data points, so every point pair with
// distinct x yields a candidate and the loss minimum over candidates is the
// global minimum. Ties break toward smaller slope, then smaller intercept.
RegressionLine quantile_regression(std::span<const PointXY> points, double q);

// Inverse standard normal CDF (rational approximation, |error| < 1e-8).
double normal_quantile(double p);

}  // namespace ptdr
