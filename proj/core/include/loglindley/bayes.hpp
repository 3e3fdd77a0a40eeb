#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "loglindley/distribution.hpp"
#include "loglindley/random.hpp"
#include "loglindley/stats.hpp"

namespace loglindley::bayes {

/// Independent priors sigma ~ Gamma(shape delta, rate tau) and
/// pi ~ Beta(alpha, beta).
class PriorSpec {
 public:
  /// Throws std::invalid_argument unless tau >= 0 and delta, alpha, beta > 0.
  PriorSpec(double tau, double delta, double alpha, double beta);

  double tau() const noexcept { return tau_; }
  double delta() const noexcept { return delta_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;

 private:
  double tau_;
  double delta_;
  double alpha_;
  double beta_;
};

/// Elementary symmetric polynomials V_0..V_m of y_j = -log x_j. These are the
/// coefficients of prod_j (1 + y_j t), so V_0 = 1 and V_1 = sum_j y_j.
struct SymmetricStats {
  /// Linear-scale values; entries may be +inf when computed_in_log_space.
  std::vector<double> v;
  /// log V_i, always finite.
  std::vector<double> log_v;
  bool computed_in_log_space = false;

  std::size_t m() const noexcept { return log_v.size() - 1; }
  double v1() const noexcept;
};

/// O(m^2) recurrence; falls back to a log-space recurrence on overflow.
SymmetricStats symmetric_stats(const Sample& s);

/// Likelihood through its expansion
///   L = exp(-(sigma - 1) V_1) sum_i pi^(m-i) (1 - pi)^i sigma^(m+i) V_i.
double likelihood_via_expansion(const Params& p, const SymmetricStats& stats);
/// log of likelihood_via_expansion, evaluated by log-sum-exp.
double log_likelihood_via_expansion(const Params& p, const SymmetricStats& stats);

/// Joint posterior as a finite mixture over i = 0..m of independent
///   sigma ~ Gamma(m + delta + i, rate tau + V_1),
///   pi    ~ Beta(alpha + m - i, beta + i).
class PosteriorMixture {
 public:
  PosteriorMixture(std::size_t m, double v1, PriorSpec prior, std::vector<double> log_weights);

  std::size_t m() const noexcept { return m_; }
  std::size_t components() const noexcept { return log_weights_.size(); }
  const PriorSpec& prior() const noexcept { return prior_; }
  double v1() const noexcept { return v1_; }

  const std::vector<double>& log_weights() const noexcept { return log_weights_; }
  double weight(std::size_t i) const;
  double gamma_shape(std::size_t i) const noexcept;
  double gamma_rate() const noexcept;
  double beta_a(std::size_t i) const noexcept;
  double beta_b(std::size_t i) const noexcept;

 private:
  std::size_t m_;
  double v1_;
  PriorSpec prior_;
  std::vector<double> log_weights_;
};

PosteriorMixture posterior(const Sample& s, const PriorSpec& prior);
PosteriorMixture posterior(const SymmetricStats& stats, const PriorSpec& prior);

/// Posterior means (Bayes estimates under squared error loss).
Params bayes_estimates(const PosteriorMixture& mix);

enum class Parameter { sigma, pi };

/// Marginal posterior cdf of sigma or pi.
double posterior_cdf(const PosteriorMixture& mix, Parameter which, double x);

/// Equal-tailed credible interval from the exact mixture cdf.
Interval credible_interval(const PosteriorMixture& mix, Parameter which, double level);

struct Draw {
  double sigma = 0.0;
  double pi = 0.0;
};

/// Exact ancestral sampling: component index, then independent Gamma and Beta.
std::vector<Draw> sample_posterior(const PosteriorMixture& mix, std::size_t n_draws, Rng& rng);

struct FitResultBayes {
  Params estimate{1.0, 1.0};
  Interval cri_sigma;
  Interval cri_pi;
  PosteriorMixture mixture;
  std::vector<Draw> posterior_draws;
  double level = 0.95;
};

/// Posterior, Bayes estimates and credible intervals in one call; draws are
/// generated only when n_draws > 0.
FitResultBayes fit(const Sample& s, const PriorSpec& prior, double level = 0.95,
                   std::size_t n_draws = 0, Rng* rng = nullptr);

// Random-walk Metropolis cross-check --------------------------------------

struct ChainSummary {
  double acceptance_rate = 0.0;
  double proposal_scale = 0.0;
};

struct MetropolisResult {
  /// draws[c][k] is the k-th kept draw of chain c.
  std::vector<std::vector<Draw>> draws;
  std::vector<ChainSummary> chains;
  double rhat_sigma = 0.0;
  double rhat_pi = 0.0;
  double ess_sigma = 0.0;
  double ess_pi = 0.0;
  /// True when either split-Rhat exceeds 1.01.
  bool rhat_warning = false;
};

struct MetropolisOptions {
  std::size_t chains = 4;
  std::size_t warmup = 2500;
  std::size_t iterations = 2500;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Random-walk Metropolis on (log sigma, logit pi) targeting prior x likelihood.
/// Requires chains >= 2. Chains are seeded from rng and run concurrently.
MetropolisResult metropolis_check(const Sample& s, const PriorSpec& prior,
                                  const MetropolisOptions& options, Rng& rng);

/// Split-Rhat over chains of equal length (each split in half).
double split_rhat(const std::vector<std::vector<double>>& chains);
/// Multi-chain effective sample size with Geyer's initial positive sequence.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

}  // namespace loglindley::bayes
