#include <doctest.h>

#include <cmath>
#include <vector>

#include "loglindley/reliability.hpp"
#include "oracles.hpp"

using namespace loglindley;
using reliability::TwoSampleParams;

namespace {

TwoSampleParams tp(double s1, double p1, double s2, double p2) { return {Params(s1, p1), Params(s2, p2)}; }

std::vector<TwoSampleParams> grid() {
  const double sigmas[] = {0.3, 1.0, 2.5, 3.5, 8.0};
  const double pis[] = {0.0, 0.2, 0.5, 0.7, 1.0};
  std::vector<TwoSampleParams> out;
  for (double s1 : sigmas)
    for (double p1 : pis)
      for (double s2 : sigmas)
        for (double p2 : pis) out.push_back(tp(s1, p1, s2, p2));
  return out;
}

double quadrature_r(const TwoSampleParams& t) {
  const double s1 = t.strength.sigma(), p1 = t.strength.pi();
  const double s2 = t.stress.sigma(), p2 = t.stress.pi();
  return oracle::integrate([&](double x) { return oracle::ll_pdf(s1, p1, x) * oracle::ll_cdf(s2, p2, x); }, 0.0,
                           1.0, 1e-14);
}

Sample draw(const Params& p, std::size_t m, std::uint64_t key) {
  Rng rng = derive_stream(41, {key});
  return sample(p, m, rng);
}

}  // namespace

TEST_CASE("reliability golden values") {
  CHECK(reliability::reliability(tp(1, 0.2, 2.5, 0.2)) == doctest::Approx(0.2297376).epsilon(1e-6));
  CHECK(reliability::reliability(tp(3.5, 0.5, 1.0, 0.7)) == doctest::Approx(0.7576132).epsilon(1e-6));
  CHECK(reliability::reliability(tp(2.5, 0.7, 1.0, 0.2)) == doctest::Approx(0.8373178).epsilon(1e-6));
  for (const auto& t : grid()) {
    if (t.strength == t.stress) CHECK(std::abs(reliability::reliability(t) - 0.5) <= 1e-12);
  }
}

TEST_CASE("complement and integral identities on a parameter grid") {
  const auto g = grid();
  CHECK(g.size() == 625);
  for (const auto& t : g) {
    const double r = reliability::reliability(t);
    CHECK(r > 0.0);
    CHECK(r < 1.0);
    CHECK(std::abs(r + reliability::reliability({t.stress, t.strength}) - 1.0) <= 1e-12);
    CHECK(std::abs(r - quadrature_r(t)) <= 1e-9);
  }
}

TEST_CASE("gradient matches finite differences") {
  Rng rng = derive_stream(3, {});
  std::uniform_real_distribution<double> us(0.2, 6.0), up(0.02, 0.98);
  for (int k = 0; k < 100; ++k) {
    const double th[4] = {us(rng), up(rng), us(rng), up(rng)};
    const auto g = reliability::reliability_gradient(tp(th[0], th[1], th[2], th[3]));
    for (int j = 0; j < 4; ++j) {
      auto f = [&](double v) {
        double q[4] = {th[0], th[1], th[2], th[3]};
        q[j] = v;
        return reliability::reliability(tp(q[0], q[1], q[2], q[3]));
      };
      const double fd = oracle::derivative(f, th[j], j % 2 ? 1e-4 : 1e-4 * th[j]);
      CHECK(std::abs(g[j] - fd) <= 1e-6 * std::max(std::abs(fd), 1e-3));
    }
  }
  for (const auto& t : grid()) {
    if (!(t.strength == t.stress)) continue;
    const auto g = reliability::reliability_gradient(t);
    CHECK(g[0] == doctest::Approx(-g[2]).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(-g[3]).epsilon(1e-12));
  }
}

TEST_CASE("equal-sigma pi gradient regression fixture") {
  const auto g = reliability::reliability_gradient(tp(2.0, 0.3, 2.0, 0.6));
  auto f = [](double p) { return reliability::reliability(tp(2.0, p, 2.0, 0.6)); };
  CHECK(g[1] == doctest::Approx(oracle::derivative(f, 0.3, 1e-3)).epsilon(1e-9));
  // R = (2 + p1 - p2) / 4 here.
  CHECK(g[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(g[3] == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("R at extreme sigma ratios") {
  for (double p1 : {0.0, 0.5, 1.0})
    for (double p2 : {0.0, 0.5, 1.0}) CHECK(reliability::reliability(tp(1.0, p1, 1000.0, p2)) < 0.01);
  for (double p1 : {0.0, 0.5, 1.0})
    for (double p2 : {0.0, 0.5, 1.0}) CHECK(reliability::reliability(tp(1000.0, p1, 1.0, p2)) > 0.99);
}

TEST_CASE("printed delta-method terms deviate from the gradient form") {
  const double s1 = 1.3, p1 = 0.35, s2 = 2.1, p2 = 0.6;
  const double S = s1 + s2, S3 = S * S * S, S4 = S3 * S;
  const mle::Covariance cx{0.04, -0.01, 0.03}, cy{0.09, 0.02, 0.05};
  const auto g = reliability::reliability_gradient(tp(s1, p1, s2, p2));

  const double a = (-2 + p1) * p2 * s1 * s1 + 2 * (-3 - 2 * p1 * (-1 + p2) + 2 * p2) * s1 * s2 +
                   p1 * (-2 + p2) * s2 * s2;
  const double b = s1 * s2 * ((-2 + p1) * s1 - p1 * s2) / S3;
  const double c = a * s1 / S4;
  const double d_printed = s1 * s2 * (p2 * s1 - (-2 + p2) * s1) / S3;
  const double d_fixed = s1 * s2 * (p2 * s1 - (-2 + p2) * s2) / S3;
  const double e = a * s2 / S4;

  // b, c and e are gradient entries as printed; d needs sigma2 in its last term.
  CHECK(b == doctest::Approx(g[3]).epsilon(1e-12));
  CHECK(c == doctest::Approx(g[2]).epsilon(1e-12));
  CHECK(-e == doctest::Approx(g[0]).epsilon(1e-12));
  CHECK(d_fixed == doctest::Approx(g[1]).epsilon(1e-12));
  CHECK(std::abs(d_printed - g[1]) > 1e-3);

  auto h_sum = [&](double d, double h3_sign) {
    const double h1 = a * s1 / S4 * (b * cy.xy + c * cy.xx);
    const double h2 = s1 * s2 / S3 * ((-2 + p1) * s1 - p1 * s2) * (b * cy.yy + c * cy.xy);
    const double h3 = h3_sign * a * s2 / S4 * (d * cx.xy - e * cx.xx);
    const double h4 = s1 * s2 / S3 * (-(-2 + p2) * s2 + p2 * s1) * (d * cx.yy - e * cx.xy);
    return h1 + h2 + h3 + h4;
  };
  const double direct = reliability::delta_method_variance(tp(s1, p1, s2, p2), cx, cy);
  CHECK(std::abs(h_sum(d_fixed, -1.0) - direct) <= 1e-10 * direct);
  CHECK(std::abs(h_sum(d_printed, 1.0) - direct) > 1e-3 * direct);
  CHECK(std::abs(h_sum(d_fixed, 1.0) - direct) > 1e-3 * direct);
}

TEST_CASE("discrepancy maps R to 1 - 2R") {
  CHECK(reliability::discrepancy(0.5) == 0.0);
  CHECK(reliability::discrepancy(0.5216) == doctest::Approx(-0.0432).epsilon(1e-12));
  CHECK(reliability::discrepancy(0.5213) == doctest::Approx(-0.0426).epsilon(1e-12));
  const auto di = reliability::discrepancy_interval({0.4, 0.7});
  CHECK(di.lo == doctest::Approx(-0.4));
  CHECK(di.hi == doctest::Approx(0.2));
}

TEST_CASE("ML report is consistent and round-trips through JSON") {
  const auto x = draw(Params(1.0, 0.2), 150, 1);
  const auto y = draw(Params(2.5, 0.2), 120, 2);
  auto rep = reliability::reliability_ml(x, y, 0.9);
  rep.seed = 17;
  CHECK(rep.method == reliability::Method::ml);
  CHECK(rep.m == 150);
  CHECK(rep.n == 120);
  CHECK(rep.size_ratio() == doctest::Approx(0.8));
  REQUIRE(rep.variance.has_value());
  CHECK(*rep.variance > 0.0);
  CHECK(rep.interval_raw.contains(rep.r_hat));
  CHECK(std::abs(rep.d_hat - (1.0 - 2.0 * rep.r_hat)) <= 1e-12);
  CHECK(std::abs(rep.r_hat - 0.2297) < 0.1);
  const double z = stats::normal_upper_quantile(0.05);
  CHECK(rep.interval_raw.width() == doctest::Approx(2 * z * std::sqrt(*rep.variance)));

  const auto back = reliability::report_from_json(reliability::to_json(rep));
  CHECK(back.method == rep.method);
  CHECK(back.r_hat == rep.r_hat);
  CHECK(back.variance == rep.variance);
  CHECK(back.interval_raw == rep.interval_raw);
  CHECK(back.interval_clamped == rep.interval_clamped);
  CHECK(back.d_hat == rep.d_hat);
  CHECK(back.d_interval == rep.d_interval);
  CHECK(back.m == rep.m);
  CHECK(back.n == rep.n);
  CHECK(back.seed == rep.seed);
  CHECK(back.level == rep.level);
}

TEST_CASE("identical samples give R near one half") {
  const auto x = draw(Params(2.5, 0.7), 200, 3);
  CHECK(reliability::reliability_ml(x, x).r_hat == doctest::Approx(0.5).epsilon(1e-12));
  const bayes::PriorSpec prior(2, 5, 3.5, 1.5);
  Rng rng = derive_stream(4, {});
  const auto rb = reliability::reliability_bayes(x, x, {prior, prior}, 100000, rng);
  CHECK(std::abs(rb.r_hat - 0.5) < 0.01);
  CHECK(rb.interval_raw.contains(rb.r_hat));
  CHECK_FALSE(rb.variance.has_value());
  CHECK(rb.method == reliability::Method::bayes);
  Rng rng2 = derive_stream(4, {});
  CHECK_THROWS_AS(reliability::reliability_bayes(x, x, {prior, prior}, 999, rng2), std::invalid_argument);
}

TEST_CASE("large samples: ML near truth and ML agrees with Bayes") {
  const Params a(1.0, 0.2), b(2.5, 0.2);
  const auto x = draw(a, 10000, 5);
  const auto y = draw(b, 10000, 6);
  const auto rm = reliability::reliability_ml(x, y);
  Rng rng = derive_stream(7, {});
  const auto rb = reliability::reliability_bayes(x, y, {bayes::PriorSpec(1, 1, 1, 4), bayes::PriorSpec(2, 5, 1, 4)},
                                                 10000, rng);
  CHECK(std::abs(rm.r_hat - rb.r_hat) < 0.01);
  CHECK(std::abs(rm.r_hat - 0.2297376) < 0.01);

  const auto big1 = draw(Params(1.7, 0.4), 100000, 8);
  const auto big2 = draw(Params(1.7, 0.4), 100000, 9);
  CHECK(std::abs(reliability::reliability_ml(big1, big2).r_hat - 0.5) < 0.01);
}

TEST_CASE("fit failures name the offending group") {
  const auto good = draw(Params(1.0, 0.2), 50, 10);
  mle::FitResultML bad = mle::fit(good);
  bad.converged = false;
  try {
    (void)reliability::reliability_ml(mle::fit(good), bad);
    FAIL("expected FitFailure");
  } catch (const reliability::FitFailure& f) {
    CHECK(f.group() == "stress");
  }
  CHECK_THROWS_AS(reliability::reliability_ml(Sample({0.5}), good), std::invalid_argument);
}
