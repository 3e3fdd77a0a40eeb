#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "loglindley/mle.hpp"
#include "oracles.hpp"

using namespace loglindley;

namespace {

Sample draw(double s, double p, std::size_t m, std::uint64_t key) {
  Rng rng = derive_stream(11, {key});
  return sample(Params(s, p), m, rng);
}

}  // namespace

TEST_CASE("log_likelihood special values and consistency") {
  const Sample x = draw(2.0, 0.4, 30, 1);
  CHECK(mle::log_likelihood(Params(1, 1), x) == doctest::Approx(0.0));
  CHECK(mle::log_likelihood(Params(1, 0), Sample({0.5})) == doctest::Approx(std::log(-std::log(0.5))).epsilon(1e-12));
  double direct = 0.0;
  for (double v : x.values()) direct += std::log(oracle::ll_pdf(1.7, 0.3, v));
  CHECK(mle::log_likelihood(Params(1.7, 0.3), x) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("score matches finite differences of the log-likelihood") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> us(0.3, 4.0), up(0.05, 0.95);
  for (int rep = 0; rep < 100; ++rep) {
    const Sample x = draw(us(gen), up(gen), 20 + rep % 30, 100 + rep);
    const double s = us(gen), p = up(gen);
    const auto g = mle::score(Params(s, p), x);
    const double ds = oracle::derivative([&](double v) { return mle::log_likelihood(Params(v, p), x); }, s, 1e-6 * s);
    const double dp = oracle::derivative([&](double v) { return mle::log_likelihood(Params(s, v), x); }, p, 1e-6);
    const double scale = std::max({std::abs(ds), std::abs(dp), 1.0});
    CHECK(std::abs(g[0] - ds) <= 1e-5 * scale);
    CHECK(std::abs(g[1] - dp) <= 1e-5 * scale);
  }
  const Sample x = draw(1.0, 0.5, 10, 7);
  double sum_log = 0.0;
  for (double v : x.values()) sum_log += std::log(v);
  CHECK(mle::score(Params(2.0, 1.0), x)[0] == doctest::Approx(10.0 / 2.0 + sum_log));
}

TEST_CASE("observed information is the negated Hessian") {
  for (int rep = 0; rep < 20; ++rep) {
    const Sample x = draw(0.5 + 0.2 * rep, 0.1 + 0.04 * rep, 40, 300 + rep);
    const double s = 0.8 + 0.1 * rep, p = 0.15 + 0.035 * rep;
    const auto info = mle::observed_info(Params(s, p), x);
    auto score_s = [&](double vs, double vp) { return mle::score(Params(vs, vp), x); };
    const double h11 = oracle::derivative([&](double v) { return score_s(v, p)[0]; }, s, 1e-5 * s);
    const double h12 = oracle::derivative([&](double v) { return score_s(s, v)[0]; }, p, 1e-5);
    const double h22 = oracle::derivative([&](double v) { return score_s(s, v)[1]; }, p, 1e-5);
    CHECK(oracle::rel_err(info.xx, -h11) < 1e-4);
    CHECK(oracle::rel_err(info.xy, -h12) < 1e-4);
    CHECK(oracle::rel_err(info.yy, -h22) < 1e-4);
    CHECK(info.yy >= 0.0);
  }
}

TEST_CASE("g_integral equals its defining integral") {
  for (double s : {0.5, 1.0, 2.5, 3.5}) {
    for (double p : {0.05, 0.2, 0.5, 0.7, 0.95}) {
      for (int k = 0; k <= 2; ++k) {
        const double ref = oracle::integrate_to_inf(
            [&](double v) { return std::pow(v, k) * std::exp(-s * v) / (p + s * (1 - p) * v); });
        CHECK(std::abs(mle::g_integral(Params(s, p), k) - ref) <= 1e-8 * std::max(1.0, ref));
      }
    }
  }
  CHECK_THROWS_AS(mle::g_integral(Params(1, 0), 0), std::domain_error);
  CHECK_THROWS_AS(mle::g_integral(Params(1, 1), 0), std::domain_error);
}

TEST_CASE("Fisher information equals the expected outer product of the score") {
  // Independent oracle: E[(d log f)(d log f)^T] by quadrature over x.
  for (double s : {1.0, 2.5}) {
    for (double p : {0.2, 0.5, 0.7}) {
      auto expect = [&](int a, int b) {
        return oracle::integrate(
            [&](double x) {
              const double lx = std::log(x);
              const double br = p + s * (p - 1.0) * lx;
              const double ds = 1.0 / s + lx + (p - 1.0) * lx / br;
              const double dp = (1.0 + s * lx) / br;
              const double u = a == 0 ? ds : dp;
              const double v = b == 0 ? ds : dp;
              return u * v * oracle::ll_pdf(s, p, x);
            },
            0.0, 1.0, 1e-12);
      };
      const auto info = mle::fisher_info(Params(s, p), 7);
      CHECK(oracle::rel_err(info.xx, 7 * expect(0, 0)) < 1e-8);
      CHECK(oracle::rel_err(info.xy, 7 * expect(0, 1)) < 1e-8);
      CHECK(oracle::rel_err(info.yy, 7 * expect(1, 1)) < 1e-8);
      CHECK(info.determinant() > 0.0);
      const auto twice = mle::fisher_info(Params(s, p), 14);
      CHECK(twice.xx == doctest::Approx(2 * info.xx));
      CHECK(twice.yy == doctest::Approx(2 * info.yy));
    }
  }
}

TEST_CASE("fit recovers parameters and reaches a stationary point") {
  const Sample x = draw(2.5, 0.4, 2000, 9);
  const auto f = mle::fit(x);
  REQUIRE(f.converged);
  CHECK_FALSE(f.boundary);
  CHECK(f.estimate.sigma() == doctest::Approx(2.5).epsilon(0.1));
  CHECK(std::abs(f.estimate.pi() - 0.4) < 0.15);
  const auto g = mle::score(f.estimate, x);
  CHECK(std::hypot(g[0], g[1]) <= 1e-5);
  CHECK(f.ci_sigma.contains(f.estimate.sigma()));
  CHECK(f.covariance.xx > 0.0);
  CHECK(f.covariance.yy > 0.0);
  const auto inv = mle::fisher_info(f.estimate, x.size()).inverse();
  CHECK(f.covariance.xx == doctest::Approx(inv.xx));
}

TEST_CASE("fit is invariant to sample order") {
  const Sample x = draw(1.0, 0.3, 60, 10);
  std::vector<double> v(x.values().begin(), x.values().end());
  std::reverse(v.begin(), v.end());
  const auto a = mle::fit(x);
  const auto b = mle::fit(Sample(v));
  CHECK(a.estimate.sigma() == doctest::Approx(b.estimate.sigma()).epsilon(1e-9));
  CHECK(a.estimate.pi() == doctest::Approx(b.estimate.pi()).epsilon(1e-9));
}

TEST_CASE("fit on a uniform grid prefers an interior point over the boundary") {
  // Both scores vanish at pi = 1, sigma = 1 / mean(-log x), yet the maximum is
  // interior; reference optimum from an independent Nelder-Mead run.
  std::vector<double> v;
  for (int i = 1; i <= 200; ++i) v.push_back((i - 0.5) / 200.0);
  const Sample x(v);
  const auto f = mle::fit(x);
  CHECK(f.converged);
  CHECK_FALSE(f.boundary);
  CHECK(f.estimate.sigma() == doctest::Approx(1.0897962).epsilon(1e-5));
  CHECK(f.estimate.pi() == doctest::Approx(0.9120912).epsilon(1e-5));
  double mean_t = 0.0;
  for (double u : v) mean_t -= std::log(u) / 200.0;
  CHECK(f.loglik > mle::log_likelihood(Params(1.0 / mean_t, 1.0), x));
}

TEST_CASE("boundary fits report finite covariance and clamped intervals") {
  int seen = 0;
  for (std::uint64_t k = 0; k < 400 && seen < 3; ++k) {
    Rng rng = derive_stream(808, {k});
    const auto f = mle::fit(sample(Params(1.0, 0.9), 12, rng));
    if (!f.boundary) continue;
    ++seen;
    CHECK((f.estimate.pi() == 0.0 || f.estimate.pi() == 1.0));
    if (!f.converged) continue;
    CHECK(std::isfinite(f.covariance.xx));
    CHECK(f.ci_pi.lo >= 0.0);
    CHECK(f.ci_pi.hi <= 1.0);
  }
  CHECK(seen > 0);
}

TEST_CASE("fit input errors") {
  CHECK_THROWS_AS(mle::fit(Sample({0.5})), std::invalid_argument);
  CHECK_THROWS_AS(mle::fit(Sample({0.5, 0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("Wald coverage for sigma at m = 150") {
  int covered = 0, used = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const auto f = mle::fit(draw(1.0, 0.2, 150, 1000 + rep));
    if (!f.converged) continue;
    ++used;
    covered += f.ci_sigma.contains(1.0) ? 1 : 0;
  }
  const double cov = static_cast<double>(covered) / used;
  CHECK(cov >= 0.90);
  CHECK(cov <= 0.99);
}
