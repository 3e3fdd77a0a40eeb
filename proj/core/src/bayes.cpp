#include "loglindley/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "loglindley/special.hpp"

namespace loglindley::bayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Components lighter than this are dropped from cdf evaluations.
constexpr double kNegligibleWeight = 1e-17;

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sum_exp(const std::vector<double>& xs) {
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

double log_gamma_variate(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  // G(a) = G(a + 1) U^(1/a), kept in log space so tiny shapes do not underflow.
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  return std::log(g(rng)) + std::log(uniform_open(rng)) / shape;
}

double beta_variate(double a, double b, Rng& rng) {
  const double la = log_gamma_variate(a, rng);
  const double lb = log_gamma_variate(b, rng);
  const double d = lb - la;
  const double x = d > 0.0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
  if (x <= 0.0) return std::numeric_limits<double>::denorm_min();
  if (x >= 1.0) return std::nextafter(1.0, 0.0);
  return x;
}

std::vector<std::size_t> active_components(const PosteriorMixture& mix) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mix.components(); ++i)
    if (mix.weight(i) >= kNegligibleWeight) idx.push_back(i);
  return idx;
}

}  // namespace

PriorSpec::PriorSpec(double tau, double delta, double alpha, double beta)
    : tau_(tau), delta_(delta), alpha_(alpha), beta_(beta) {
  if (!std::isfinite(tau) || tau < 0.0) throw std::invalid_argument("PriorSpec: tau must be >= 0");
  if (!std::isfinite(delta) || !(delta > 0.0)) throw std::invalid_argument("PriorSpec: delta must be > 0");
  if (!std::isfinite(alpha) || !(alpha > 0.0)) throw std::invalid_argument("PriorSpec: alpha must be > 0");
  if (!std::isfinite(beta) || !(beta > 0.0)) throw std::invalid_argument("PriorSpec: beta must be > 0");
}

double SymmetricStats::v1() const noexcept {
  return computed_in_log_space ? std::exp(log_v[1]) : v[1];
}

SymmetricStats symmetric_stats(const Sample& s) {
  const std::vector<double> y = s.neg_logs();
  const std::size_t m = y.size();

  SymmetricStats out;
  out.v.assign(m + 1, 0.0);
  out.v[0] = 1.0;
  bool overflow = false;
  for (std::size_t j = 0; j < m && !overflow; ++j) {
    for (std::size_t i = j + 1; i >= 1; --i) out.v[i] += y[j] * out.v[i - 1];
    for (std::size_t i = 0; i <= j + 1; ++i)
      if (!(out.v[i] < 1e300)) overflow = true;
  }

  out.log_v.resize(m + 1);
  if (!overflow) {
    for (std::size_t i = 0; i <= m; ++i) out.log_v[i] = std::log(out.v[i]);
    return out;
  }

  out.computed_in_log_space = true;
  std::fill(out.log_v.begin(), out.log_v.end(), kNegInf);
  out.log_v[0] = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double ly = std::log(y[j]);
    for (std::size_t i = j + 1; i >= 1; --i)
      out.log_v[i] = log_add_exp(out.log_v[i], ly + out.log_v[i - 1]);
  }
  for (std::size_t i = 0; i <= m; ++i) out.v[i] = std::exp(out.log_v[i]);
  return out;
}

double log_likelihood_via_expansion(const Params& p, const SymmetricStats& stats) {
  const std::size_t m = stats.m();
  const double sigma = p.sigma();
  const double pi = p.pi();
  const double log_pi = std::log(pi);
  const double log_1mpi = std::log1p(-pi);
  const double log_sigma = std::log(sigma);

  std::vector<double> terms(m + 1, kNegInf);
  for (std::size_t i = 0; i <= m; ++i) {
    const double mi = static_cast<double>(m - i);
    const double ii = static_cast<double>(i);
    if ((pi == 0.0 && m - i > 0) || (pi == 1.0 && i > 0)) continue;
    const double a = (m - i > 0) ? mi * log_pi : 0.0;
    const double b = (i > 0) ? ii * log_1mpi : 0.0;
    terms[i] = a + b + (mi + 2.0 * ii) * log_sigma + stats.log_v[i];
  }
  return -(sigma - 1.0) * stats.v1() + log_sum_exp(terms);
}

double likelihood_via_expansion(const Params& p, const SymmetricStats& stats) {
  return std::exp(log_likelihood_via_expansion(p, stats));
}

PosteriorMixture::PosteriorMixture(std::size_t m, double v1, PriorSpec prior,
                                   std::vector<double> log_weights)
    : m_(m), v1_(v1), prior_(prior), log_weights_(std::move(log_weights)) {
  if (log_weights_.size() != m_ + 1) {
    throw std::invalid_argument("PosteriorMixture: need m + 1 weights");
  }
}

double PosteriorMixture::weight(std::size_t i) const { return std::exp(log_weights_.at(i)); }
double PosteriorMixture::gamma_shape(std::size_t i) const noexcept {
  return static_cast<double>(m_ + i) + prior_.delta();
}
double PosteriorMixture::gamma_rate() const noexcept { return prior_.tau() + v1_; }
double PosteriorMixture::beta_a(std::size_t i) const noexcept {
  return prior_.alpha() + static_cast<double>(m_ - i);
}
double PosteriorMixture::beta_b(std::size_t i) const noexcept {
  return prior_.beta() + static_cast<double>(i);
}

PosteriorMixture posterior(const SymmetricStats& stats, const PriorSpec& prior) {
  const std::size_t m = stats.m();
  const double v1 = stats.v1();
  const double log_rate = std::log(prior.tau() + v1);

  // log W_i = log V_i + log B(alpha + m - i, beta + i)
  //         + log Gamma(m + delta + i) - (m + delta + i) log(tau + V_1)
  std::vector<double> lw(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const double shape = static_cast<double>(m + i) + prior.delta();
    lw[i] = stats.log_v[i] +
            special::log_beta(prior.alpha() + static_cast<double>(m - i),
                              prior.beta() + static_cast<double>(i)) +
            special::log_gamma(shape) - shape * log_rate;
  }
  const double norm = log_sum_exp(lw);
  if (!std::isfinite(norm)) throw std::runtime_error("posterior: weights cannot be normalized");
  for (double& x : lw) x -= norm;
  return PosteriorMixture(m, v1, prior, std::move(lw));
}

PosteriorMixture posterior(const Sample& s, const PriorSpec& prior) {
  return posterior(symmetric_stats(s), prior);
}

Params bayes_estimates(const PosteriorMixture& mix) {
  const double m = static_cast<double>(mix.m());
  const auto& pr = mix.prior();
  double sigma = 0.0;
  double pi = 0.0;
  for (std::size_t i = 0; i < mix.components(); ++i) {
    const double w = mix.weight(i);
    sigma += w * mix.gamma_shape(i);
    pi += w * mix.beta_a(i);
  }
  sigma /= mix.gamma_rate();
  pi /= pr.alpha() + pr.beta() + m;
  return Params(sigma, std::clamp(pi, 0.0, 1.0));
}

double posterior_cdf(const PosteriorMixture& mix, Parameter which, double x) {
  if (which == Parameter::sigma) {
    if (x <= 0.0) return 0.0;
    const double rx = mix.gamma_rate() * x;
    double acc = 0.0;
    for (std::size_t i = 0; i < mix.components(); ++i) {
      const double w = mix.weight(i);
      if (w < kNegligibleWeight) continue;
      acc += w * boost::math::gamma_p(mix.gamma_shape(i), rx);
    }
    return std::min(acc, 1.0);
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < mix.components(); ++i) {
    const double w = mix.weight(i);
    if (w < kNegligibleWeight) continue;
    acc += w * boost::math::ibeta(mix.beta_a(i), mix.beta_b(i), x);
  }
  return std::min(acc, 1.0);
}

Interval credible_interval(const PosteriorMixture& mix, Parameter which, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("credible_interval: level must lie in (0, 1)");
  }
  const auto idx = active_components(mix);
  const std::size_t first = idx.front();
  const std::size_t last = idx.back();

  // The mixture quantile lies between the quantiles of its extreme components:
  // Gamma quantiles grow with the shape, Beta quantiles shrink as i grows.
  auto component_quantile = [&](std::size_t i, double q) {
    if (which == Parameter::sigma) return boost::math::gamma_p_inv(mix.gamma_shape(i), q) / mix.gamma_rate();
    return boost::math::ibeta_inv(mix.beta_a(i), mix.beta_b(i), q);
  };
  auto solve = [&](double q) {
    double lo = component_quantile(which == Parameter::sigma ? first : last, q);
    double hi = component_quantile(which == Parameter::sigma ? last : first, q);
    auto f = [&](double x) { return posterior_cdf(mix, which, x) - q; };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;
    std::uintmax_t max_iter = 200;
    auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(48), max_iter);
    return 0.5 * (a + b);
  };
  const double tail = 0.5 * (1.0 - level);
  return {solve(tail), solve(1.0 - tail)};
}

std::vector<Draw> sample_posterior(const PosteriorMixture& mix, std::size_t n_draws, Rng& rng) {
  if (n_draws == 0) throw std::invalid_argument("sample_posterior: n_draws must be positive");
  std::vector<double> w(mix.components());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = mix.weight(i);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());

  std::vector<Draw> out(n_draws);
  const double rate = mix.gamma_rate();
  for (Draw& d : out) {
    const std::size_t i = pick(rng);
    d.sigma = std::exp(log_gamma_variate(mix.gamma_shape(i), rng)) / rate;
    d.pi = beta_variate(mix.beta_a(i), mix.beta_b(i), rng);
  }
  return out;
}

FitResultBayes fit(const Sample& s, const PriorSpec& prior, double level, std::size_t n_draws,
                   Rng* rng) {
  if (n_draws > 0 && rng == nullptr) throw std::invalid_argument("bayes::fit: draws need an rng");
  PosteriorMixture mix = posterior(s, prior);
  FitResultBayes out{bayes_estimates(mix),
                     credible_interval(mix, Parameter::sigma, level),
                     credible_interval(mix, Parameter::pi, level),
                     mix,
                     {},
                     level};
  if (n_draws > 0) out.posterior_draws = sample_posterior(out.mixture, n_draws, *rng);
  return out;
}

}  // namespace loglindley::bayes
