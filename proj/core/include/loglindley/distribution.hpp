#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loglindley/random.hpp"

namespace loglindley {

/// Parameters of the re-parametrized log-Lindley law LL(sigma, pi) on (0, 1):
///
///   f(x) = sigma [pi + sigma (pi - 1) log x] x^(sigma - 1)
///   F(x) = [1 + sigma (pi - 1) log x] x^sigma
///
/// sigma > 0 is a shape parameter and pi in [0, 1] mixes the power-function
/// law (pi = 1) with its log-weighted companion (pi = 0).
class Params {
 public:
  /// Throws std::invalid_argument unless sigma > 0, 0 <= pi <= 1, both finite.
  Params(double sigma, double pi);

  double sigma() const noexcept { return sigma_; }
  double pi() const noexcept { return pi_; }

  friend bool operator==(const Params&, const Params&) = default;

 private:
  double sigma_;
  double pi_;
};

/// An observed sample; every value lies strictly inside (0, 1).
class Sample {
 public:
  /// Throws std::invalid_argument when empty or when a value is outside (0, 1).
  explicit Sample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// -log x_i for every observation (all strictly positive).
  std::vector<double> neg_logs() const;

 private:
  std::vector<double> values_;
};

double pdf(const Params& p, double x);
double log_pdf(const Params& p, double x);

/// Accepts x in (0, 1]; cdf(p, 1) == 1.
double cdf(const Params& p, double x);

/// Inverse of cdf on (0, 1). Uses the W_{-1} branch of Lambert W; pi == 1
/// reduces to the power-function law u^(1/sigma).
double quantile(const Params& p, double u);

/// m inverse-transform draws.
Sample sample(const Params& p, std::size_t m, Rng& rng);

/// E[X^k] = sigma (sigma + k pi) / (sigma + k)^2.
double moment(const Params& p, int k);

}  // namespace loglindley
