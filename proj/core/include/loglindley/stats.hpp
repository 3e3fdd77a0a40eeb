#pragma once

#include <functional>
#include <span>
#include <vector>

namespace loglindley {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return lo <= v && v <= hi; }
  double width() const noexcept { return hi - lo; }
  Interval clamped(double a, double b) const noexcept;

  friend bool operator==(const Interval&, const Interval&) = default;
};

namespace stats {

/// Pairwise (cascade) summation; result depends only on element order.
double pairwise_sum(std::span<const double> xs);
double mean(std::span<const double> xs);
/// Unbiased sample variance (n - 1 denominator); 0 for fewer than 2 values.
double variance(std::span<const double> xs);

/// Linear-interpolation sample quantile (Hyndman-Fan type 7). Copies and
/// partially sorts its input.
double quantile(std::span<const double> xs, double prob);
/// Type-7 quantile of data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

/// Upper standard-normal quantile z with P(Z > z) = tail.
double normal_upper_quantile(double tail);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// One-sample Kolmogorov-Smirnov test against a continuous cdf.
KsResult ks_one_sample(std::span<const double> xs,
                       const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace stats
}  // namespace loglindley
