#include "loglindley/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace loglindley {

Interval Interval::clamped(double a, double b) const noexcept {
  return {std::clamp(lo, a, b), std::clamp(hi, a, b)};
}

namespace stats {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(),
                 [mu](double x) { return (x - mu) * (x - mu); });
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw std::invalid_argument("quantile: probability outside [0, 1]");
  }
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> xs, double prob) {
  std::vector<double> copy(xs.begin(), xs.end());
  std::sort(copy.begin(), copy.end());
  return quantile_sorted(copy, prob);
}

double normal_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail < 1.0)) {
    throw std::invalid_argument("normal_upper_quantile: tail must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::complement(boost::math::normal(), tail));
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_one_sample(std::span<const double> xs,
                       const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_one_sample: empty input");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty input");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = std::sqrt(nx * ny / (nx + ny));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

}  // namespace stats
}  // namespace loglindley
