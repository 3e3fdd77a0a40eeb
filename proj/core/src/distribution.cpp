#include "loglindley/distribution.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "loglindley/special.hpp"

namespace loglindley {

namespace {

void require_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error(std::string(what) + ": x must lie in (0, 1), got " +
                            std::to_string(x));
  }
}

double clamp_open_unit(double x) {
  if (x >= 1.0) return std::nextafter(1.0, 0.0);
  if (x <= 0.0) return std::numeric_limits<double>::denorm_min();
  return x;
}

double quantile_by_bracketing(const Params& p, double u) {
  auto f = [&](double x) { return cdf(p, x) - u; };
  double lo = std::numeric_limits<double>::min();
  double hi = 1.0;
  if (f(lo) >= 0.0) return lo;
  std::uintmax_t max_iter = 200;
  auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, f(lo), 1.0 - u, boost::math::tools::eps_tolerance<double>(52), max_iter);
  return clamp_open_unit(0.5 * (a + b));
}

}  // namespace

Params::Params(double sigma, double pi) : sigma_(sigma), pi_(pi) {
  if (!std::isfinite(sigma) || !(sigma > 0.0)) {
    throw std::invalid_argument("Params: sigma must be finite and positive");
  }
  if (!std::isfinite(pi) || pi < 0.0 || pi > 1.0) {
    throw std::invalid_argument("Params: pi must lie in [0, 1]");
  }
}

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("Sample: no observations");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] < 1.0)) {
      throw std::invalid_argument("Sample: observation " + std::to_string(i) +
                                  " outside (0, 1)");
    }
  }
}

std::vector<double> Sample::neg_logs() const {
  std::vector<double> out;
  out.reserve(values_.size());
  for (double x : values_) out.push_back(-std::log(x));
  return out;
}

double log_pdf(const Params& p, double x) {
  require_open_unit(x, "log_pdf");
  const double lx = std::log(x);
  const double bracket = p.pi() + p.sigma() * (p.pi() - 1.0) * lx;
  if (!(bracket > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(p.sigma()) + std::log(bracket) + (p.sigma() - 1.0) * lx;
}

double pdf(const Params& p, double x) {
  require_open_unit(x, "pdf");
  const double lx = std::log(x);
  const double bracket = p.pi() + p.sigma() * (p.pi() - 1.0) * lx;
  return p.sigma() * bracket * std::exp((p.sigma() - 1.0) * lx);
}

double cdf(const Params& p, double x) {
  if (!(x > 0.0 && x <= 1.0)) {
    throw std::domain_error("cdf: x must lie in (0, 1], got " + std::to_string(x));
  }
  if (x == 1.0) return 1.0;
  const double lx = std::log(x);
  return (1.0 + p.sigma() * (p.pi() - 1.0) * lx) * std::exp(p.sigma() * lx);
}

double quantile(const Params& p, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("quantile: u must lie in (0, 1), got " + std::to_string(u));
  }
  if (p.pi() == 1.0) return clamp_open_unit(std::pow(u, 1.0 / p.sigma()));

  // With y = 1 - sigma (1 - pi) log x and c = 1 / (1 - pi), F(x) = u becomes
  // (-c y) exp(-c y) = -c u exp(-c), whose root with y >= 1 is on W_{-1}.
  // Then log x = (W + c) / sigma.
  const double c = 1.0 / (1.0 - p.pi());
  double log_neg_arg = std::log(c) + std::log(u) - c;
  if (log_neg_arg > -1.0) {
    const double excess = std::exp(log_neg_arg) - std::exp(-1.0);
    if (excess > 1e-12) return quantile_by_bracketing(p, u);
    log_neg_arg = -1.0;
  }
  const double w = special::lambert_w_m1_from_log(log_neg_arg);
  return clamp_open_unit(std::exp((w + c) / p.sigma()));
}

Sample sample(const Params& p, std::size_t m, Rng& rng) {
  if (m == 0) throw std::invalid_argument("sample: size must be positive");
  std::vector<double> values(m);
  for (double& v : values) v = quantile(p, uniform_open(rng));
  return Sample(std::move(values));
}

double moment(const Params& p, int k) {
  if (k < 1) throw std::invalid_argument("moment: order must be positive");
  const double s = p.sigma();
  return s * (s + k * p.pi()) / ((s + k) * (s + k));
}

}  // namespace loglindley
