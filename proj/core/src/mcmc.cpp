#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "loglindley/bayes.hpp"

namespace loglindley::bayes {

namespace {

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

// Log posterior density in u = (log sigma, logit pi), Jacobian included.
struct Target {
  std::vector<double> t;
  double sum_t = 0.0;
  PriorSpec prior;

  double operator()(const std::array<double, 2>& u) const {
    const double sigma = std::exp(u[0]);
    const double log_pi = -softplus(-u[1]);
    const double log_1mpi = -softplus(u[1]);
    const double pi = std::exp(log_pi);
    const double q = sigma * std::exp(log_1mpi);
    double ll = static_cast<double>(t.size()) * u[0] - (sigma - 1.0) * sum_t;
    for (double ti : t) {
      const double bracket = pi + q * ti;
      if (!(bracket > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += std::log(bracket);
    }
    return ll + prior.delta() * u[0] - prior.tau() * sigma + prior.alpha() * log_pi +
           prior.beta() * log_1mpi;
  }
};

struct ChainOutput {
  std::vector<Draw> draws;
  ChainSummary summary;
};

// 2x2 lower Cholesky factor of a covariance, regularized if needed.
std::array<double, 3> cholesky2(double sxx, double sxy, double syy) {
  sxx = std::max(sxx, 1e-12);
  syy = std::max(syy, 1e-12);
  const double l11 = std::sqrt(sxx);
  const double l21 = sxy / l11;
  const double l22 = std::sqrt(std::max(syy - l21 * l21, 1e-12));
  return {l11, l21, l22};
}

ChainOutput run_chain(const Target& target, std::array<double, 2> u, std::size_t warmup,
                      std::size_t iterations, Rng rng) {
  std::normal_distribution<double> normal;
  double lp = target(u);

  // Phase 1 (first half of warmup): independent coordinates, scale adapted
  // in batches towards ~30% acceptance. Phase 2: proposal shaped by the
  // covariance of the later phase-1 draws, scalar scale still adapted.
  std::array<double, 3> chol{1.0, 0.0, 1.0};
  double scale = 0.5;
  const std::size_t phase1 = warmup / 2;
  std::vector<std::array<double, 2>> history;
  std::size_t batch_accept = 0;
  std::size_t batch_size = 0;
  std::size_t kept_accept = 0;

  ChainOutput out;
  out.draws.reserve(iterations);
  for (std::size_t it = 0; it < warmup + iterations; ++it) {
    if (it == phase1 && history.size() > 10) {
      std::array<double, 2> mu{0.0, 0.0};
      for (const auto& h : history) {
        mu[0] += h[0];
        mu[1] += h[1];
      }
      mu[0] /= static_cast<double>(history.size());
      mu[1] /= static_cast<double>(history.size());
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (const auto& h : history) {
        sxx += (h[0] - mu[0]) * (h[0] - mu[0]);
        sxy += (h[0] - mu[0]) * (h[1] - mu[1]);
        syy += (h[1] - mu[1]) * (h[1] - mu[1]);
      }
      const double n = static_cast<double>(history.size() - 1);
      chol = cholesky2(sxx / n, sxy / n, syy / n);
      scale = 2.38 / std::sqrt(2.0);
    }

    const double z0 = normal(rng);
    const double z1 = normal(rng);
    const std::array<double, 2> prop{u[0] + scale * chol[0] * z0,
                                     u[1] + scale * (chol[1] * z0 + chol[2] * z1)};
    const double lp_prop = target(prop);
    const bool accept = std::log(uniform_open(rng)) < lp_prop - lp;
    if (accept) {
      u = prop;
      lp = lp_prop;
    }

    if (it < warmup) {
      batch_accept += accept ? 1 : 0;
      if (++batch_size == 50) {
        const double rate = static_cast<double>(batch_accept) / 50.0;
        scale *= std::exp(rate - 0.3);
        batch_accept = 0;
        batch_size = 0;
      }
      if (it >= phase1 / 2 && it < phase1) history.push_back(u);
    } else {
      kept_accept += accept ? 1 : 0;
      out.draws.push_back({std::exp(u[0]), 1.0 / (1.0 + std::exp(-u[1]))});
    }
  }
  out.summary.acceptance_rate =
      iterations > 0 ? static_cast<double>(kept_accept) / static_cast<double>(iterations) : 0.0;
  out.summary.proposal_scale = scale;
  return out;
}

std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const auto parts = split_halves(chains);
  if (parts.size() < 2 || parts.front().size() < 2) {
    throw std::invalid_argument("split_rhat: need at least one chain of length >= 4");
  }
  const double n = static_cast<double>(parts.front().size());
  const double k = static_cast<double>(parts.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& p : parts) {
    const double mu = std::accumulate(p.begin(), p.end(), 0.0) / n;
    means.push_back(mu);
    double ss = 0.0;
    for (double x : p) ss += (x - mu) * (x - mu);
    w += ss / (n - 1.0);
  }
  w /= k;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / k;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (k - 1.0);
  if (!(w > 0.0)) return 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const auto parts = split_halves(chains);
  const std::size_t n = parts.front().size();
  const double k = static_cast<double>(parts.size());
  if (n < 4) throw std::invalid_argument("effective_sample_size: chains too short");
  const double nd = static_cast<double>(n);

  std::vector<double> means;
  double w = 0.0;
  for (const auto& p : parts) {
    const double mu = std::accumulate(p.begin(), p.end(), 0.0) / nd;
    means.push_back(mu);
    double ss = 0.0;
    for (double x : p) ss += (x - mu) * (x - mu);
    w += ss / (nd - 1.0);
  }
  w /= k;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / k;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (k - 1.0);
  const double var_plus = (nd - 1.0) / nd * w + b / nd;
  if (!(var_plus > 0.0)) return k * nd;

  auto rho = [&](std::size_t lag) {
    double v = 0.0;
    for (const auto& p : parts)
      for (std::size_t i = lag; i < n; ++i) v += (p[i] - p[i - lag]) * (p[i] - p[i - lag]);
    v /= k * static_cast<double>(n - lag);
    return 1.0 - v / (2.0 * var_plus);
  };

  double sum_pairs = 0.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = rho(lag) + rho(lag + 1);
    if (!(pair > 0.0)) break;
    sum_pairs += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum_pairs, 1.0 / std::log10(k * nd));
  return k * nd / tau;
}

MetropolisResult metropolis_check(const Sample& s, const PriorSpec& prior,
                                  const MetropolisOptions& options, Rng& rng) {
  if (options.chains < 2) throw std::invalid_argument("metropolis_check: need at least 2 chains");
  if (options.iterations < 4) throw std::invalid_argument("metropolis_check: too few iterations");

  Target target{s.neg_logs(), 0.0, prior};
  target.sum_t = std::accumulate(target.t.begin(), target.t.end(), 0.0);
  const double sigma0 = static_cast<double>(target.t.size()) / target.sum_t;

  // Over-dispersed starting points and per-chain streams are drawn up front so
  // the result does not depend on thread scheduling.
  std::normal_distribution<double> normal;
  std::vector<std::array<double, 2>> starts(options.chains);
  std::vector<std::uint64_t> seeds(options.chains);
  for (std::size_t c = 0; c < options.chains; ++c) {
    starts[c] = {std::log(sigma0) + 0.5 * normal(rng), 1.5 * normal(rng)};
    seeds[c] = rng();
  }

  std::vector<ChainOutput> outputs(options.chains);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(options.threads ? options.threads : hw, options.chains));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c = next++; c < options.chains; c = next++) {
      outputs[c] = run_chain(target, starts[c], options.warmup, options.iterations,
                             derive_stream(seeds[c], {c}));
    }
  };
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  MetropolisResult result;
  std::vector<std::vector<double>> sig(options.chains), pis(options.chains);
  for (std::size_t c = 0; c < options.chains; ++c) {
    for (const Draw& d : outputs[c].draws) {
      sig[c].push_back(d.sigma);
      pis[c].push_back(d.pi);
    }
    result.chains.push_back(outputs[c].summary);
    result.draws.push_back(std::move(outputs[c].draws));
  }
  result.rhat_sigma = split_rhat(sig);
  result.rhat_pi = split_rhat(pis);
  result.ess_sigma = effective_sample_size(sig);
  result.ess_pi = effective_sample_size(pis);
  result.rhat_warning = result.rhat_sigma > 1.01 || result.rhat_pi > 1.01;
  return result;
}

}  // namespace loglindley::bayes
