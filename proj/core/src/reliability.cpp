#include "loglindley/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace loglindley::reliability {

const char* to_string(Method m) noexcept { return m == Method::ml ? "ML" : "Bayes"; }

double ReliabilityReport::size_ratio() const noexcept {
  return m == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(m);
}

namespace {

double reliability_raw(double s1, double p1, double s2, double p2) {
  const double s = s1 + s2;
  const double num = s1 * (s1 + 3.0 * s2) + 2.0 * p1 * s2 * s2 - 2.0 * p2 * s1 * s2 +
                     p1 * p2 * (s1 * s2 - s2 * s2);
  return s1 * num / (s * s * s);
}

}  // namespace

double reliability(const TwoSampleParams& tp) {
  return reliability_raw(tp.strength.sigma(), tp.strength.pi(), tp.stress.sigma(), tp.stress.pi());
}

std::array<double, 4> reliability_gradient(const TwoSampleParams& tp) {
  const double s1 = tp.strength.sigma();
  const double p1 = tp.strength.pi();
  const double s2 = tp.stress.sigma();
  const double p2 = tp.stress.pi();
  const double s = s1 + s2;
  const double s3 = s * s * s;
  const double s4 = s3 * s;

  // R = s1 N / s^3 with N the bracketed polynomial.
  const double n = s1 * (s1 + 3.0 * s2) + 2.0 * p1 * s2 * s2 - 2.0 * p2 * s1 * s2 +
                   p1 * p2 * (s1 * s2 - s2 * s2);
  const double dn_ds1 = 2.0 * s1 + 3.0 * s2 - 2.0 * p2 * s2 + p1 * p2 * s2;
  const double dn_ds2 = 3.0 * s1 + 4.0 * p1 * s2 - 2.0 * p2 * s1 + p1 * p2 * (s1 - 2.0 * s2);
  const double dn_dp1 = 2.0 * s2 * s2 + p2 * (s1 * s2 - s2 * s2);
  const double dn_dp2 = -2.0 * s1 * s2 + p1 * (s1 * s2 - s2 * s2);

  return {(n + s1 * dn_ds1) / s3 - 3.0 * s1 * n / s4,
          s1 * dn_dp1 / s3,
          s1 * dn_ds2 / s3 - 3.0 * s1 * n / s4,
          s1 * dn_dp2 / s3};
}

double delta_method_variance(const TwoSampleParams& tp, const mle::Covariance& cx,
                             const mle::Covariance& cy) {
  const auto g = reliability_gradient(tp);
  return g[0] * g[0] * cx.xx + 2.0 * g[0] * g[1] * cx.xy + g[1] * g[1] * cx.yy +
         g[2] * g[2] * cy.xx + 2.0 * g[2] * g[3] * cy.xy + g[3] * g[3] * cy.yy;
}

ReliabilityReport reliability_ml(const mle::FitResultML& fx, const mle::FitResultML& fy,
                                 double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("reliability_ml: bad level");
  if (!fx.converged) throw FitFailure("strength", "ML fit of the strength sample did not converge");
  if (!fy.converged) throw FitFailure("stress", "ML fit of the stress sample did not converge");

  const TwoSampleParams tp{fx.estimate, fy.estimate};
  ReliabilityReport rep;
  rep.method = Method::ml;
  rep.level = level;
  rep.m = fx.m;
  rep.n = fy.m;
  rep.r_hat = reliability(tp);
  rep.variance = std::max(delta_method_variance(tp, fx.covariance, fy.covariance), 0.0);
  const double z = stats::normal_upper_quantile((1.0 - level) / 2.0);
  const double half = z * std::sqrt(*rep.variance);
  rep.interval_raw = {rep.r_hat - half, rep.r_hat + half};
  rep.interval_clamped = rep.interval_raw.clamped(0.0, 1.0);
  rep.d_hat = discrepancy(rep.r_hat);
  rep.d_interval = discrepancy_interval(rep.interval_raw);
  return rep;
}

ReliabilityReport reliability_ml(const Sample& x, const Sample& y, double level,
                                 const mle::FitOptions& options) {
  mle::FitOptions opt = options;
  opt.level = level;
  return reliability_ml(mle::fit(x, opt), mle::fit(y, opt), level);
}

ReliabilityReport reliability_bayes(const bayes::PosteriorMixture& px,
                                    const bayes::PosteriorMixture& py, std::size_t n_draws,
                                    Rng& rng, double level) {
  if (n_draws < 1000) throw std::invalid_argument("reliability_bayes: need at least 1000 draws");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("reliability_bayes: bad level");

  const auto dx = bayes::sample_posterior(px, n_draws, rng);
  const auto dy = bayes::sample_posterior(py, n_draws, rng);
  std::vector<double> r(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i)
    r[i] = reliability_raw(dx[i].sigma, dx[i].pi, dy[i].sigma, dy[i].pi);

  ReliabilityReport rep;
  rep.method = Method::bayes;
  rep.level = level;
  rep.m = px.m();
  rep.n = py.m();
  rep.r_hat = stats::mean(r);
  std::sort(r.begin(), r.end());
  const double tail = 0.5 * (1.0 - level);
  rep.interval_raw = {stats::quantile_sorted(r, tail), stats::quantile_sorted(r, 1.0 - tail)};
  rep.interval_clamped = rep.interval_raw.clamped(0.0, 1.0);
  rep.d_hat = discrepancy(rep.r_hat);
  rep.d_interval = discrepancy_interval(rep.interval_raw);
  return rep;
}

ReliabilityReport reliability_bayes(const Sample& x, const Sample& y,
                                    const std::pair<bayes::PriorSpec, bayes::PriorSpec>& priors,
                                    std::size_t n_draws, Rng& rng, double level) {
  return reliability_bayes(bayes::posterior(x, priors.first), bayes::posterior(y, priors.second),
                           n_draws, rng, level);
}

double discrepancy(double r) { return 1.0 - 2.0 * r; }

double discrepancy(const ReliabilityReport& report) { return discrepancy(report.r_hat); }

Interval discrepancy_interval(const Interval& r) { return {1.0 - 2.0 * r.hi, 1.0 - 2.0 * r.lo}; }

nlohmann::json to_json(const ReliabilityReport& rep) {
  nlohmann::json j;
  j["method"] = to_string(rep.method);
  j["r_hat"] = rep.r_hat;
  if (rep.variance) j["variance"] = *rep.variance;
  j["interval_raw"] = {rep.interval_raw.lo, rep.interval_raw.hi};
  j["interval_clamped"] = {rep.interval_clamped.lo, rep.interval_clamped.hi};
  j["d_hat"] = rep.d_hat;
  j["d_interval"] = {rep.d_interval.lo, rep.d_interval.hi};
  j["m"] = rep.m;
  j["n"] = rep.n;
  j["size_ratio"] = rep.size_ratio();
  j["level"] = rep.level;
  if (rep.seed) j["seed"] = *rep.seed;
  return j;
}

ReliabilityReport report_from_json(const nlohmann::json& j) {
  auto interval = [](const nlohmann::json& a) { return Interval{a.at(0).get<double>(), a.at(1).get<double>()}; };
  ReliabilityReport rep;
  const auto method = j.at("method").get<std::string>();
  if (method == "ML") {
    rep.method = Method::ml;
  } else if (method == "Bayes") {
    rep.method = Method::bayes;
  } else {
    throw std::invalid_argument("report_from_json: unknown method '" + method + "'");
  }
  rep.r_hat = j.at("r_hat").get<double>();
  if (j.contains("variance")) rep.variance = j.at("variance").get<double>();
  rep.interval_raw = interval(j.at("interval_raw"));
  rep.interval_clamped = interval(j.at("interval_clamped"));
  rep.d_hat = j.at("d_hat").get<double>();
  rep.d_interval = interval(j.at("d_interval"));
  rep.m = j.at("m").get<std::size_t>();
  rep.n = j.at("n").get<std::size_t>();
  rep.level = j.value("level", 0.95);
  if (j.contains("seed")) rep.seed = j.at("seed").get<std::uint64_t>();
  return rep;
}

}  // namespace loglindley::reliability
