#include <benchmark/benchmark.h>

#include "loglindley/bayes.hpp"
#include "loglindley/distribution.hpp"
#include "loglindley/mle.hpp"
#include "loglindley/reliability.hpp"
#include "loglindley/special.hpp"

using namespace loglindley;

namespace {

Sample make_sample(std::size_t m) {
  Rng rng = derive_stream(1, {m});
  return sample(Params(2.5, 0.2), m, rng);
}

void BM_Quantile(benchmark::State& state) {
  const Params p(2.5, 0.2);
  double u = 0.0;
  for (auto _ : state) {
    u += 0.6180339887498949;
    if (u >= 1.0) u -= 1.0;
    benchmark::DoNotOptimize(quantile(p, u));
  }
}
BENCHMARK(BM_Quantile);

void BM_LambertWm1(benchmark::State& state) {
  double x = -0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(special::lambert_w_m1(x));
    x = x * 0.999 - 1e-6;
    if (x < -0.36) x = -0.3;
  }
}
BENCHMARK(BM_LambertWm1);

void BM_FitML(benchmark::State& state) {
  const Sample s = make_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mle::fit(s));
}
BENCHMARK(BM_FitML)->Arg(25)->Arg(150)->Arg(1000);

void BM_Posterior(benchmark::State& state) {
  const Sample s = make_sample(static_cast<std::size_t>(state.range(0)));
  const bayes::PriorSpec prior(2, 5, 1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(bayes::bayes_estimates(bayes::posterior(s, prior)));
}
BENCHMARK(BM_Posterior)->Arg(25)->Arg(150)->Arg(1000);

void BM_CredibleInterval(benchmark::State& state) {
  const auto mix = bayes::posterior(make_sample(static_cast<std::size_t>(state.range(0))), bayes::PriorSpec(2, 5, 1, 4));
  for (auto _ : state) benchmark::DoNotOptimize(bayes::credible_interval(mix, bayes::Parameter::sigma, 0.95));
}
BENCHMARK(BM_CredibleInterval)->Arg(25)->Arg(150);

void BM_ReliabilityBayes(benchmark::State& state) {
  const auto px = bayes::posterior(make_sample(150), bayes::PriorSpec(2, 5, 1, 4));
  const auto py = bayes::posterior(make_sample(100), bayes::PriorSpec(2, 5, 1, 4));
  Rng rng = derive_stream(2, {});
  for (auto _ : state) benchmark::DoNotOptimize(reliability::reliability_bayes(px, py, 10000, rng));
}
BENCHMARK(BM_ReliabilityBayes);

}  // namespace

BENCHMARK_MAIN();
