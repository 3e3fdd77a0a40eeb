#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "loglindley/bayes.hpp"
#include "loglindley/distribution.hpp"
#include "loglindley/mle.hpp"
#include "loglindley/stats.hpp"

namespace loglindley::reliability {

/// Strength X ~ LL(sigma1, pi1) and independent stress Y ~ LL(sigma2, pi2).
struct TwoSampleParams {
  Params strength;
  Params stress;
};

enum class Method { ml, bayes };

const char* to_string(Method m) noexcept;

struct ReliabilityReport {
  Method method = Method::ml;
  double r_hat = 0.0;
  /// Delta-method variance; ML only.
  std::optional<double> variance;
  Interval interval_raw;
  Interval interval_clamped;
  double d_hat = 0.0;
  Interval d_interval;
  std::size_t m = 0;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  double level = 0.95;

  /// n / m.
  double size_ratio() const noexcept;
};

/// A fit of one of the two samples did not converge.
class FitFailure : public std::runtime_error {
 public:
  FitFailure(std::string group, const std::string& what)
      : std::runtime_error(what), group_(std::move(group)) {}
  const std::string& group() const noexcept { return group_; }

 private:
  std::string group_;
};

/// R = P(Y < X)
///   = s1 / (s1 + s2)^3 [s1 (s1 + 3 s2) + 2 p1 s2^2 - 2 p2 s1 s2 + p1 p2 (s1 s2 - s2^2)].
double reliability(const TwoSampleParams& tp);

/// dR / d(sigma1, pi1, sigma2, pi2).
std::array<double, 4> reliability_gradient(const TwoSampleParams& tp);

/// Delta-method variance g' Sigma g with block-diagonal Sigma.
double delta_method_variance(const TwoSampleParams& tp, const mle::Covariance& strength_cov,
                             const mle::Covariance& stress_cov);

/// Plug-in estimate at the two ML fits with a Wald interval. Throws
/// FitFailure (group "strength" or "stress") when a fit does not converge.
ReliabilityReport reliability_ml(const Sample& x, const Sample& y, double level = 0.95,
                                 const mle::FitOptions& options = {});

/// Same, reusing existing fits.
ReliabilityReport reliability_ml(const mle::FitResultML& fx, const mle::FitResultML& fy,
                                 double level = 0.95);

/// Posterior mean and equal-tailed interval of R from n_draws joint draws of
/// the two exact posterior mixtures (n_draws >= 1000).
ReliabilityReport reliability_bayes(const Sample& x, const Sample& y,
                                    const std::pair<bayes::PriorSpec, bayes::PriorSpec>& priors,
                                    std::size_t n_draws, Rng& rng, double level = 0.95);

ReliabilityReport reliability_bayes(const bayes::PosteriorMixture& px,
                                    const bayes::PosteriorMixture& py, std::size_t n_draws,
                                    Rng& rng, double level = 0.95);

/// D(A, B) = R(B, A) - R(A, B) = 1 - 2 R(A, B).
double discrepancy(const ReliabilityReport& report);
double discrepancy(double r);
/// Image of an R interval under D = 1 - 2R.
Interval discrepancy_interval(const Interval& r_interval);

nlohmann::json to_json(const ReliabilityReport& report);
ReliabilityReport report_from_json(const nlohmann::json& j);

}  // namespace loglindley::reliability
