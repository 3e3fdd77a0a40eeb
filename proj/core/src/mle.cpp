#include "loglindley/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>

#include "loglindley/special.hpp"
#include "nelder_mead.hpp"

namespace loglindley::mle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// All routines below take t_i = -log x_i > 0, so that the density bracket is
// pi + sigma (1 - pi) t_i.

double loglik_t(double sigma, double pi, std::span<const double> t, double sum_t) {
  const double m = static_cast<double>(t.size());
  double acc = m * std::log(sigma) - (sigma - 1.0) * sum_t;
  const double q = sigma * (1.0 - pi);
  for (double ti : t) {
    const double bracket = pi + q * ti;
    if (!(bracket > 0.0)) return kNegInf;
    acc += std::log(bracket);
  }
  return acc;
}

std::array<double, 2> score_t(double sigma, double pi, std::span<const double> t) {
  const double m = static_cast<double>(t.size());
  double ds = m / sigma;
  double dp = 0.0;
  for (double ti : t) {
    const double bracket = pi + sigma * (1.0 - pi) * ti;
    ds += -ti + (1.0 - pi) * ti / bracket;
    dp += (1.0 - sigma * ti) / bracket;
  }
  return {ds, dp};
}

InfoMatrix observed_info_t(double sigma, double pi, std::span<const double> t) {
  const double m = static_cast<double>(t.size());
  InfoMatrix j{m / (sigma * sigma), 0.0, 0.0};
  for (double ti : t) {
    const double bracket = pi + sigma * (1.0 - pi) * ti;
    const double a = (1.0 - pi) * ti / bracket;
    const double b = (1.0 - sigma * ti) / bracket;
    j.xx += a * a;
    j.xy += ti / (bracket * bracket);
    j.yy += b * b;
  }
  return j;
}

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// sigma solving E[X] = sigma (sigma + 1/2) / (sigma + 1)^2 = mean at pi = 1/2.
double moment_start(double mean) {
  const double a = 1.0 - mean;
  const double b = 0.5 - 2.0 * mean;
  const double c = -mean;
  return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

}  // namespace

SymMatrix2 SymMatrix2::inverse() const {
  const double det = determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw std::domain_error("SymMatrix2::inverse: singular matrix");
  }
  return {yy / det, -xy / det, xx / det};
}

double log_likelihood(const Params& p, const Sample& s) {
  const auto t = s.neg_logs();
  return loglik_t(p.sigma(), p.pi(), t, std::accumulate(t.begin(), t.end(), 0.0));
}

std::array<double, 2> score(const Params& p, const Sample& s) {
  return score_t(p.sigma(), p.pi(), s.neg_logs());
}

InfoMatrix observed_info(const Params& p, const Sample& s) {
  return observed_info_t(p.sigma(), p.pi(), s.neg_logs());
}

double g_integral(const Params& p, int k) {
  if (!(p.pi() > 0.0 && p.pi() < 1.0)) {
    throw std::domain_error("g_integral: pi must lie strictly inside (0, 1)");
  }
  if (k < 0 || k > 2) throw std::domain_error("g_integral: k must be 0, 1 or 2");
  const double z = p.pi() / (1.0 - p.pi());
  const double factorial = (k == 2) ? 2.0 : 1.0;
  return factorial * special::exp_integral_scaled(k + 1, z) /
         (std::pow(p.sigma(), k + 1) * (1.0 - p.pi()));
}

InfoMatrix fisher_info(const Params& p, std::size_t m) {
  if (m == 0) throw std::invalid_argument("fisher_info: sample size must be positive");
  const double s = p.sigma();
  const double pi = p.pi();
  const double g0 = g_integral(p, 0);
  const double g1 = g_integral(p, 1);
  const double g2 = g_integral(p, 2);
  const double n = static_cast<double>(m);
  // Loses ~log10(z^2) digits in I22 as pi -> 1; the boundary clip bounds z.
  return {n / (s * s) + n * s * (1.0 - pi) * (1.0 - pi) * g2,
          n * s * g1,
          n * s * (g0 - 2.0 * s * g1 + s * s * g2)};
}

FitResultML fit(const Sample& s, const FitOptions& options) {
  if (s.size() < 2) throw std::invalid_argument("fit: need at least two observations");
  const auto [mn, mx] = std::minmax_element(s.values().begin(), s.values().end());
  if (*mn == *mx) throw std::invalid_argument("fit: degenerate sample (all values equal)");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::invalid_argument("fit: level must lie in (0, 1)");
  }

  const std::vector<double> t = s.neg_logs();
  const double sum_t = std::accumulate(t.begin(), t.end(), 0.0);
  const double m = static_cast<double>(t.size());

  // Unconstrained coordinates (log sigma, logit pi), projected onto a box
  // wide enough to reach the pi boundary to double precision.
  auto objective = [&](const detail::Point<2>& u) {
    return -loglik_t(std::exp(u[0]), logistic(u[1]), t, sum_t);
  };
  detail::NelderMeadOptions<2> nm;
  nm.lower = {-20.0, -40.0};
  nm.upper = {20.0, 40.0};
  nm.f_rel_tol = options.f_rel_tol;
  nm.diameter_tol = options.diameter_tol;
  nm.max_iterations = options.max_iterations;

  const double mean = std::accumulate(s.values().begin(), s.values().end(), 0.0) / m;
  auto first = detail::nelder_mead<2>(objective, {std::log(moment_start(mean)), 0.0}, nm);
  // A restart rebuilds a simplex that may have collapsed onto the box face.
  nm.initial_step = 0.05;
  nm.max_iterations = std::max(1, options.max_iterations - first.iterations);
  auto second = detail::nelder_mead<2>(objective, first.x, nm);
  const auto& best = (second.value <= first.value) ? second : first;

  double sigma = std::exp(best.x[0]);
  double pi = logistic(best.x[1]);
  bool nm_converged = second.converged;
  const bool sigma_on_box = best.x[0] <= nm.lower[0] || best.x[0] >= nm.upper[0];

  FitResultML out;
  out.m = t.size();
  out.level = options.level;
  out.iterations = first.iterations + second.iterations;
  out.boundary = pi < options.boundary_tol || pi > 1.0 - options.boundary_tol;

  if (out.boundary) {
    pi = pi < 0.5 ? 0.0 : 1.0;
  } else {
    // Newton refinement with the analytic score; steps are kept only while
    // they stay interior and do not lower the likelihood.
    double ll = loglik_t(sigma, pi, t, sum_t);
    for (int k = 0; k < 20; ++k) {
      const auto g = score_t(sigma, pi, t);
      const InfoMatrix info = observed_info_t(sigma, pi, t);
      if (!(info.determinant() > 0.0)) break;
      const SymMatrix2 inv = info.inverse();
      const double ds = inv.xx * g[0] + inv.xy * g[1];
      const double dp = inv.xy * g[0] + inv.yy * g[1];
      const double ns = sigma + ds;
      const double np = pi + dp;
      if (!(ns > 0.0 && np > 0.0 && np < 1.0)) break;
      const double nll = loglik_t(ns, np, t, sum_t);
      if (!(nll >= ll - 1e-12 * std::abs(ll))) break;
      sigma = ns;
      pi = np;
      ll = nll;
      if (std::abs(ds) <= 1e-14 * sigma && std::abs(dp) <= 1e-14) break;
    }
  }

  out.estimate = Params(sigma, pi);
  out.loglik = loglik_t(sigma, pi, t, sum_t);

  // Interior estimates must be stationary in the unconstrained coordinates.
  const double pi_eval = std::clamp(pi, options.boundary_clip, 1.0 - options.boundary_clip);
  bool stationary = true;
  if (!out.boundary) {
    const auto g = score_t(sigma, pi, t);
    const double tol = 1e-3 * m;
    stationary = std::abs(sigma * g[0]) <= tol && std::abs(pi * (1.0 - pi) * g[1]) <= tol;
  }
  out.converged = nm_converged && !sigma_on_box && stationary && std::isfinite(out.loglik);

  const InfoMatrix info = fisher_info(Params(sigma, pi_eval), out.m);
  if (info.determinant() > 0.0) {
    out.covariance = info.inverse();
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.covariance = {nan, nan, nan};
    out.converged = false;
  }

  const double z = stats::normal_upper_quantile((1.0 - options.level) / 2.0);
  const double se_sigma = std::sqrt(std::max(out.covariance.xx, 0.0));
  const double se_pi = std::sqrt(std::max(out.covariance.yy, 0.0));
  out.ci_sigma = {sigma - z * se_sigma, sigma + z * se_sigma};
  out.ci_pi_raw = {pi - z * se_pi, pi + z * se_pi};
  out.ci_pi = out.ci_pi_raw.clamped(0.0, 1.0);
  return out;
}

}  // namespace loglindley::mle
