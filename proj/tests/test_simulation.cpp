#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "loglindley/simulation.hpp"

using namespace loglindley;
using namespace loglindley::simulation;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.truth = Params(2.5, 0.2);
  cfg.sizes = {{10, 0}, {40, 0}};
  cfg.replicates = 60;
  cfg.seed = 99;
  cfg.posterior_draws = 2000;
  return cfg;
}

std::string csv(const std::vector<SimRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

}  // namespace

TEST_CASE("studies are reproducible and independent of the thread count") {
  SimConfig cfg = small_config();
  cfg.threads = 1;
  const auto ml1 = csv(run_ml_study(cfg));
  const auto b1 = csv(run_bayes_study(cfg));
  cfg.threads = 4;
  CHECK(csv(run_ml_study(cfg)) == ml1);
  CHECK(csv(run_bayes_study(cfg)) == b1);
  cfg.seed = 100;
  CHECK(csv(run_ml_study(cfg)) != ml1);

  SimConfig rc;
  rc.truth = reliability::TwoSampleParams{Params(1, 0.2), Params(2.5, 0.2)};
  rc.sizes = {{8, 6}};
  rc.replicates = 20;
  rc.posterior_draws = 1000;
  rc.seed = 3;
  rc.threads = 1;
  const auto r1 = csv(run_reliability_study(rc));
  rc.threads = 3;
  CHECK(csv(run_reliability_study(rc)) == r1);
}

TEST_CASE("single replicate is deterministic") {
  SimConfig cfg = small_config();
  cfg.replicates = 1;
  const auto a = run_ml_study(cfg);
  const auto b = run_ml_study(cfg);
  CHECK(csv(a) == csv(b));
  CHECK(a[0].at("sigma").used + a[0].n_failures == 1);
  CHECK(a[0].at("sigma").mse == doctest::Approx(a[0].at("sigma").bias * a[0].at("sigma").bias));
}

TEST_CASE("summaries satisfy basic moment relations") {
  const SimConfig cfg = small_config();
  for (const auto& rows : {run_ml_study(cfg), run_bayes_study(cfg)}) {
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sizes.m == 10);
    for (const auto& row : rows) {
      for (const auto& e : row.estimands) {
        CHECK(e.mse >= e.bias * e.bias);
        CHECK(e.coverage >= 0.0);
        CHECK(e.coverage <= 1.0);
        CHECK(e.interval.lo <= e.interval.hi);
        CHECK(e.bias_se >= 0.0);
      }
      CHECK_THROWS_AS(row.at("nope"), std::out_of_range);
    }
    CHECK(rows[1].at("sigma").mse < rows[0].at("sigma").mse);
  }
}

TEST_CASE("symmetric reliability study centres on one half") {
  SimConfig cfg;
  cfg.truth = reliability::TwoSampleParams{Params(2.5, 0.7), Params(2.5, 0.7)};
  cfg.sizes = {{30, 30}};
  cfg.replicates = 200;
  cfg.posterior_draws = 1000;
  cfg.seed = 11;
  const auto rows = run_reliability_study(cfg);
  for (const char* name : {"R_ML", "R_Bayes"}) {
    const auto& e = rows[0].at(name);
    CHECK(e.truth == doctest::Approx(0.5));
    CHECK(std::abs(e.bias) < 4 * e.bias_se + 1e-3);
  }
}

TEST_CASE("preset priors match the generating values") {
  struct Case {
    double s, p, tau, delta, alpha, beta;
  };
  for (const Case& c : {Case{1, 0.2, 1, 1, 1, 4}, Case{2.5, 0.5, 2, 5, 1, 1}, Case{3.5, 0.7, 2, 7, 3.5, 1.5}}) {
    const auto pr = preset_prior(Params(c.s, c.p));
    CHECK(pr == bayes::PriorSpec(c.tau, c.delta, c.alpha, c.beta));
    CHECK(pr.delta() / pr.tau() == doctest::Approx(c.s));
    CHECK(pr.alpha() / (pr.alpha() + pr.beta()) == doctest::Approx(c.p));
  }
  CHECK_THROWS_AS(preset_prior(Params(1.7, 0.2)), std::invalid_argument);
}

TEST_CASE("config JSON round trip and validation") {
  SimConfig cfg = small_config();
  cfg.prior = bayes::PriorSpec(2, 5, 1, 4);
  const auto back = config_from_json(to_json(cfg));
  CHECK(std::get<Params>(back.truth) == std::get<Params>(cfg.truth));
  CHECK(back.sizes == cfg.sizes);
  CHECK(back.replicates == cfg.replicates);
  CHECK(back.seed == cfg.seed);
  CHECK(back.prior == cfg.prior);
  CHECK(back.posterior_draws == cfg.posterior_draws);

  SimConfig rc;
  rc.truth = reliability::TwoSampleParams{Params(1, 0.2), Params(2.5, 0.2)};
  rc.sizes = {{5, 5}, {150, 100}};
  rc.stress_prior = bayes::PriorSpec(2, 5, 1, 4);
  const auto rback = config_from_json(to_json(rc));
  CHECK(std::get<reliability::TwoSampleParams>(rback.truth).stress == Params(2.5, 0.2));
  CHECK(rback.sizes == rc.sizes);
  CHECK(rback.stress_prior == rc.stress_prior);

  using nlohmann::json;
  const json base = to_json(small_config());
  auto broken = [&](auto edit) {
    json j = base;
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["sizes"] = json::array({1}); })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["sizes"] = json::array(); })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["sizes"] = json::array({json::array({5, 5})}); })),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["replicates"] = 0; })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["level"] = 1.5; })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["truth"]["pi"] = 2.0; })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j.erase("truth"); })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(broken([](json& j) { j["sizes"] = "ten"; })), std::invalid_argument);
}

TEST_CASE("rows abort when too many replicates fail") {
  SimConfig cfg;
  cfg.truth = Params(1.0, 0.2);
  cfg.sizes = {{2, 0}};
  cfg.replicates = 300;
  cfg.seed = 5;
  cfg.max_failure_fraction = 1.0;
  const auto rows = run_ml_study(cfg);
  const std::size_t failures = rows[0].n_failures;
  CHECK(rows[0].at("sigma").used + failures == 300);
  if (failures > 0) {
    cfg.max_failure_fraction = 0.0;
    CHECK_THROWS_AS(run_ml_study(cfg), std::runtime_error);
  }
}

TEST_CASE("table and csv layouts") {
  const auto rows = run_ml_study(small_config());
  const auto text = csv(rows);
  CHECK(text.rfind("m,bias_sigma,mse_sigma,lo_sigma,hi_sigma,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  const auto table = format_table(rows);
  CHECK(table.find("sigma") != std::string::npos);
  CHECK(to_json(rows).size() == 2);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 1000);
  CHECK_THROWS_AS(parallel_for(10, 4,
                               [](std::size_t i) {
                                 if (i == 7) throw std::logic_error("boom");
                               }),
                  std::logic_error);
}
