#include "ptdr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ptdr/rng.hpp"

namespace ptdr {

double percentile_sorted(std::span<const double> sorted, double y) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty sample set");
  if (!(y > 0.0 && y < 100.0)) throw std::invalid_argument("percentile: y must be in (0,100)");
  const double h = static_cast<double>(sorted.size() - 1) * y / 100.0;
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> samples, double y) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, y);
}

static double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

static double sample_stddev(std::span<const double> v, double mean) {
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double coeff_variation(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("coeff_variation: need at least 2 samples");
  const double m = mean_of(samples);
  if (!(m > 0)) throw std::invalid_argument("coeff_variation: mean must be positive");
  return sample_stddev(samples, m) / m;
}

SummaryStats SummaryStats::from_samples(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("SummaryStats: empty sample set");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.mean = mean_of(sorted);
  if (!(s.mean > 0)) throw std::invalid_argument("SummaryStats: mean must be positive");
  s.stddev = sorted.size() >= 2 ? sample_stddev(sorted, s.mean) : 0.0;
  s.cov = s.stddev / s.mean;
  for (std::size_t i = 0; i < kKeyPercentiles.size(); ++i) {
    s.percentiles[i] = percentile_sorted(sorted, kKeyPercentiles[i]);
  }
  return s;
}

// Average ranks; ties share the mean of the positions they occupy.
static std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

static double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) throw std::invalid_argument("spearman: zero rank variance");
  return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 3) throw std::invalid_argument("spearman: need at least 3 pairs");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

double spearman_permutation_pvalue(std::span<const double> xs, std::span<const double> ys,
                                   int permutations, std::uint64_t seed) {
  if (permutations < 1) throw std::invalid_argument("permutation test: need >= 1 permutation");
  const double observed = std::abs(spearman(xs, ys));
  std::vector<double> shuffled(ys.begin(), ys.end());
  int at_least = 0;
  for (int p = 0; p < permutations; ++p) {
    Rng rng = derive_stream(seed, {stream_key("spearman-perm"), static_cast<std::uint64_t>(p)});
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
      std::swap(shuffled[i], shuffled[j]);
    }
    if (std::abs(spearman(xs, shuffled)) >= observed - 1e-12) ++at_least;
  }
  return (1.0 + at_least) / (1.0 + permutations);
}

double pinball_loss(std::span<const PointXY> points, double q, double a, double b) {
  double loss = 0;
  for (const auto& p : points) {
    const double r = p.y - (a + b * p.x);
    loss += r >= 0 ? q * r : (q - 1.0) * r;
  }
  return loss;
}

RegressionLine quantile_regression(std::span<const PointXY> points, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile_regression: q must be in (0,1)");
  if (points.size() < 2) throw std::invalid_argument("quantile_regression: need at least 2 points");

  const std::size_t n = points.size();
  double best_loss = std::numeric_limits<double>::infinity();
  double best_a = 0, best_b = 0;
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (points[i].x == points[j].x) continue;
      const double b = (points[j].y - points[i].y) / (points[j].x - points[i].x);
      const double a = points[i].y - b * points[i].x;
      const double loss = pinball_loss(points, q, a, b);
      if (!found || loss < best_loss ||
          (loss == best_loss && (b < best_b || (b == best_b && a < best_a)))) {
        found = true;
        best_loss = loss;
        best_a = a;
        best_b = b;
      }
    }
  }
  if (!found) throw std::invalid_argument("quantile_regression: degenerate x values (vertical line)");

  RegressionLine line;
  line.intercept = best_a;
  line.slope = best_b;
  line.quantile = q;
  line.point_count = static_cast<int>(n);
  return line;
}

// Acklam's rational approximation to the inverse standard normal CDF.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double u = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double u = p - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }

  // One Halley refinement step against erfc brings the error below 1e-8.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace ptdr
