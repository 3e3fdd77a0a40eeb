#include <doctest.h>

#include <cmath>
#include <vector>

#include "loglindley/random.hpp"
#include "loglindley/stats.hpp"

using namespace loglindley;

TEST_CASE("summaries") {
  const std::vector<double> xs{3.0, 1.0, 4.0, 1.0, 5.0};
  CHECK(stats::mean(xs) == doctest::Approx(2.8));
  CHECK(stats::variance(xs) == doctest::Approx(3.2));
  CHECK(stats::quantile(xs, 0.5) == doctest::Approx(3.0));
  // Type 7: h = (n - 1) p = 1 between sorted[1] = 1 and sorted[2] = 3.
  CHECK(stats::quantile(xs, 0.25) == doctest::Approx(1.0));
  CHECK(stats::quantile(xs, 0.375) == doctest::Approx(2.0));
  CHECK(stats::quantile(xs, 1.0) == doctest::Approx(5.0));
  std::vector<double> many(1 << 20, 0.1);
  CHECK(stats::pairwise_sum(many) == doctest::Approx(0.1 * (1 << 20)).epsilon(1e-14));
}

TEST_CASE("normal quantile") {
  CHECK(stats::normal_upper_quantile(0.025) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(stats::normal_upper_quantile(0.5) == doctest::Approx(0.0));
}

TEST_CASE("interval helpers") {
  const Interval i{-0.2, 1.3};
  CHECK(i.clamped(0, 1) == Interval{0.0, 1.0});
  CHECK(i.contains(0.5));
  CHECK_FALSE(i.contains(1.4));
  CHECK(i.width() == doctest::Approx(1.5));
}

TEST_CASE("Kolmogorov-Smirnov") {
  CHECK(stats::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  Rng rng = derive_stream(1, {});
  std::vector<double> u(5000), v(5000), w(5000);
  for (auto& x : u) x = uniform_open(rng);
  for (auto& x : v) x = uniform_open(rng);
  for (auto& x : w) x = std::sqrt(uniform_open(rng));
  CHECK(stats::ks_one_sample(u, [](double x) { return x; }).p_value > 0.001);
  CHECK(stats::ks_two_sample(u, v).p_value > 0.001);
  CHECK(stats::ks_two_sample(u, w).p_value < 1e-6);
}

TEST_CASE("derived streams are independent of call order") {
  Rng a = derive_stream(9, {1, 2});
  Rng b = derive_stream(9, {2, 1});
  Rng c = derive_stream(9, {1, 2});
  const auto x = a();
  CHECK(x != b());
  CHECK(x == c());
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform_open(a);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}
