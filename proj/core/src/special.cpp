#include "loglindley/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace loglindley::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kBranchPoint = -1.0 / std::numbers::e;

double halley_w_m1(double x, double w) {
  for (int iter = 0; iter < 40; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0 || f == 0.0) break;
    const double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= dw;
    if (w > -1.0) w = -1.0;
    if (std::abs(dw) <= 4.0 * kEps * std::abs(w)) break;
  }
  return w;
}

// E_n(z) / exp(-z) by the modified Lentz continued fraction; z >= 1, n >= 1.
double continued_fraction_scaled(int n, double z) {
  constexpr double kTiny = 1e-300;
  double b = z + n;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double a = -static_cast<double>(i) * (n - 1 + i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw std::runtime_error("exp_integral: continued fraction did not converge");
}

// E_1(z) by its power series; intended for 0 < z < 1.
double e1_series(double z) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -z / k;
    const double contrib = -term / k;
    sum += contrib;
    if (std::abs(contrib) <= kEps * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(z) + sum;
}

void check_order(int n, double z) {
  if (n < 0 || n > 3) {
    throw std::domain_error("exp_integral: order must be in {0,1,2,3}, got " +
                            std::to_string(n));
  }
  if (!(z > 0.0)) {
    throw std::domain_error("exp_integral: argument must be positive");
  }
}

}  // namespace

double lambert_w_m1(double x) {
  if (!(x >= kBranchPoint) || !(x < 0.0)) {
    throw std::domain_error("lambert_w_m1: argument outside [-1/e, 0)");
  }
  if (x == kBranchPoint) return -1.0;

  double w;
  if (x < -0.25) {
    // Puiseux expansion about the branch point.
    const double p = -std::sqrt(2.0 * (1.0 + std::numbers::e * x));
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  return halley_w_m1(x, std::min(w, -1.0));
}

double lambert_w_m1_from_log(double log_neg_x) {
  if (!(log_neg_x <= -1.0)) {
    throw std::domain_error("lambert_w_m1_from_log: log(-x) must be <= -1");
  }
  if (log_neg_x > -700.0) return lambert_w_m1(-std::exp(log_neg_x));

  // Solve w + log(-w) = log(-x); far from the branch point Newton is enough.
  double w = log_neg_x - std::log(-log_neg_x);
  for (int iter = 0; iter < 50; ++iter) {
    const double h = w + std::log(-w) - log_neg_x;
    const double dw = h / (1.0 + 1.0 / w);
    w -= dw;
    if (std::abs(dw) <= 4.0 * kEps * std::abs(w)) break;
  }
  return w;
}

double exp_integral(int n, double z) {
  check_order(n, z);
  if (n == 0) return std::exp(-z) / z;
  if (z >= 1.0) return std::exp(-z) * continued_fraction_scaled(n, z);

  // Upward recurrence n E_{n+1} = e^{-z} - z E_n is stable for small z.
  const double ez = std::exp(-z);
  double e = e1_series(z);
  for (int k = 1; k < n; ++k) e = (ez - z * e) / k;
  return e;
}

double exp_integral_scaled(int n, double z) {
  check_order(n, z);
  if (n == 0) return 1.0 / z;
  if (z >= 1.0) return continued_fraction_scaled(n, z);
  return std::exp(z) * exp_integral(n, z);
}

double log_gamma(double z) {
  if (!(z > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  return std::lgamma(z);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("log_beta: arguments must be positive");
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace loglindley::special
