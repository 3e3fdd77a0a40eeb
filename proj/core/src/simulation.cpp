#include "loglindley/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "loglindley/mle.hpp"

namespace loglindley::simulation {

namespace {

struct Outcome {
  double value = 0.0;
  Interval interval;
  bool ok = false;
};

using ReplicateFn =
    std::function<std::vector<Outcome>(std::size_t row, const SampleSizes& sizes, Rng& rng)>;

EstimandSummary summarize(const std::string& name, double truth,
                          const std::vector<std::vector<Outcome>>& reps, std::size_t k) {
  std::vector<double> err, sq, lo, hi, cover;
  for (const auto& r : reps) {
    const Outcome& o = r[k];
    if (!o.ok) continue;
    const double e = o.value - truth;
    err.push_back(e);
    sq.push_back(e * e);
    lo.push_back(o.interval.lo);
    hi.push_back(o.interval.hi);
    cover.push_back(o.interval.contains(truth) ? 1.0 : 0.0);
  }
  EstimandSummary s;
  s.name = name;
  s.truth = truth;
  s.used = err.size();
  s.failures = reps.size() - err.size();
  if (err.empty()) return s;
  const double n = static_cast<double>(err.size());
  s.bias = stats::mean(err);
  s.mse = stats::mean(sq);
  s.interval = {stats::mean(lo), stats::mean(hi)};
  s.coverage = stats::mean(cover);
  s.bias_se = std::sqrt(stats::variance(err) / n);
  s.mse_se = std::sqrt(stats::variance(sq) / n);
  return s;
}

std::vector<SimRow> run_study(const SimConfig& cfg, const std::vector<std::string>& names,
                              const std::vector<double>& truths, const ReplicateFn& fn) {
  if (cfg.replicates == 0) throw std::invalid_argument("simulation: replicates must be positive");
  if (cfg.sizes.empty()) throw std::invalid_argument("simulation: no sample sizes given");

  std::vector<SimRow> rows;
  for (std::size_t row = 0; row < cfg.sizes.size(); ++row) {
    const SampleSizes sizes = cfg.sizes[row];
    std::vector<std::vector<Outcome>> reps(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t i) {
      Rng rng = derive_stream(cfg.seed, {row, i});
      reps[i] = fn(row, sizes, rng);
    });

    SimRow out;
    out.sizes = sizes;
    for (std::size_t k = 0; k < names.size(); ++k) {
      out.estimands.push_back(summarize(names[k], truths[k], reps, k));
      out.n_failures = std::max(out.n_failures, out.estimands.back().failures);
    }
    if (static_cast<double>(out.n_failures) >
        cfg.max_failure_fraction * static_cast<double>(cfg.replicates)) {
      throw std::runtime_error("simulation: too many failed replicates at m=" +
                               std::to_string(sizes.m) + " n=" + std::to_string(sizes.n));
    }
    rows.push_back(std::move(out));
  }
  return rows;
}

const Params& one_sample_truth(const SimConfig& cfg) {
  if (const auto* p = std::get_if<Params>(&cfg.truth)) return *p;
  throw std::invalid_argument("simulation: one-sample study needs Params truth");
}

void check_one_sample_sizes(const SimConfig& cfg) {
  for (const auto& s : cfg.sizes)
    if (s.m < 2) throw std::invalid_argument("simulation: sample sizes must be >= 2");
}

std::string fmt4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

const EstimandSummary& SimRow::at(std::string_view name) const {
  for (const auto& e : estimands)
    if (e.name == name) return e;
  throw std::out_of_range("SimRow: no estimand named " + std::string(name));
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads ? threads : hw, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

bayes::PriorSpec preset_prior(const Params& truth) {
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  double tau = 0.0, delta = 0.0, alpha = 0.0, beta = 0.0;
  if (near(truth.sigma(), 1.0)) {
    tau = 1.0, delta = 1.0;
  } else if (near(truth.sigma(), 2.5)) {
    tau = 2.0, delta = 5.0;
  } else if (near(truth.sigma(), 3.5)) {
    tau = 2.0, delta = 7.0;
  } else {
    throw std::invalid_argument("preset_prior: no preset for sigma");
  }
  if (near(truth.pi(), 0.2)) {
    alpha = 1.0, beta = 4.0;
  } else if (near(truth.pi(), 0.5)) {
    alpha = 1.0, beta = 1.0;
  } else if (near(truth.pi(), 0.7)) {
    alpha = 3.5, beta = 1.5;
  } else {
    throw std::invalid_argument("preset_prior: no preset for pi");
  }
  return bayes::PriorSpec(tau, delta, alpha, beta);
}

std::vector<SimRow> run_ml_study(const SimConfig& cfg) {
  const Params truth = one_sample_truth(cfg);
  check_one_sample_sizes(cfg);
  mle::FitOptions opt;
  opt.level = cfg.level;
  return run_study(cfg, {"sigma", "pi"}, {truth.sigma(), truth.pi()},
                   [&](std::size_t, const SampleSizes& sz, Rng& rng) {
                     const Sample x = sample(truth, sz.m, rng);
                     std::vector<Outcome> out(2);
                     try {
                       const auto f = mle::fit(x, opt);
                       if (!f.converged) return out;
                       out[0] = {f.estimate.sigma(), f.ci_sigma, true};
                       out[1] = {f.estimate.pi(), f.ci_pi_raw, true};
                     } catch (const std::invalid_argument&) {
                     }
                     return out;
                   });
}

std::vector<SimRow> run_bayes_study(const SimConfig& cfg) {
  const Params truth = one_sample_truth(cfg);
  check_one_sample_sizes(cfg);
  const bayes::PriorSpec prior = cfg.prior ? *cfg.prior : preset_prior(truth);
  return run_study(cfg, {"sigma", "pi"}, {truth.sigma(), truth.pi()},
                   [&](std::size_t, const SampleSizes& sz, Rng& rng) {
                     const Sample x = sample(truth, sz.m, rng);
                     const auto f = bayes::fit(x, prior, cfg.level);
                     return std::vector<Outcome>{{f.estimate.sigma(), f.cri_sigma, true},
                                                 {f.estimate.pi(), f.cri_pi, true}};
                   });
}

std::vector<SimRow> run_reliability_study(const SimConfig& cfg) {
  const auto* tp = std::get_if<reliability::TwoSampleParams>(&cfg.truth);
  if (tp == nullptr) throw std::invalid_argument("simulation: reliability study needs two-sample truth");
  for (const auto& s : cfg.sizes)
    if (s.m < 2 || s.n < 2) throw std::invalid_argument("simulation: sample sizes must be >= 2");
  const bayes::PriorSpec px = cfg.prior ? *cfg.prior : preset_prior(tp->strength);
  const bayes::PriorSpec py = cfg.stress_prior ? *cfg.stress_prior : preset_prior(tp->stress);
  const double r = reliability::reliability(*tp);
  mle::FitOptions opt;
  opt.level = cfg.level;

  return run_study(cfg, {"R_ML", "R_Bayes"}, {r, r},
                   [&](std::size_t, const SampleSizes& sz, Rng& rng) {
                     const Sample x = sample(tp->strength, sz.m, rng);
                     const Sample y = sample(tp->stress, sz.n, rng);
                     std::vector<Outcome> out(2);
                     try {
                       const auto fx = mle::fit(x, opt);
                       const auto fy = mle::fit(y, opt);
                       if (fx.converged && fy.converged) {
                         const auto rep = reliability::reliability_ml(fx, fy, cfg.level);
                         out[0] = {rep.r_hat, rep.interval_raw, true};
                       }
                     } catch (const std::invalid_argument&) {
                     }
                     const auto rep = reliability::reliability_bayes(
                         bayes::posterior(x, px), bayes::posterior(y, py), cfg.posterior_draws,
                         rng, cfg.level);
                     out[1] = {rep.r_hat, rep.interval_raw, true};
                     return out;
                   });
}

void write_csv(std::ostream& os, const std::vector<SimRow>& rows) {
  if (rows.empty()) return;
  const bool two = rows.front().sizes.n > 0;
  os << (two ? "m,n" : "m");
  for (const auto& e : rows.front().estimands)
    os << ",bias_" << e.name << ",mse_" << e.name << ",lo_" << e.name << ",hi_" << e.name;
  for (const auto& e : rows.front().estimands)
    os << ",coverage_" << e.name << ",bias_se_" << e.name << ",mse_se_" << e.name;
  os << ",n_failures\n";

  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(10);
  for (const auto& row : rows) {
    os << row.sizes.m;
    if (two) os << ',' << row.sizes.n;
    for (const auto& e : row.estimands)
      os << ',' << e.bias << ',' << e.mse << ',' << e.interval.lo << ',' << e.interval.hi;
    for (const auto& e : row.estimands) os << ',' << e.coverage << ',' << e.bias_se << ',' << e.mse_se;
    os << ',' << row.n_failures << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

std::string format_table(const std::vector<SimRow>& rows) {
  std::ostringstream os;
  if (rows.empty()) return {};
  const bool two = rows.front().sizes.n > 0;
  os << std::left << std::setw(10) << (two ? "m,n" : "m");
  for (const auto& e : rows.front().estimands) {
    os << std::setw(14) << ("Bias(" + e.name + ")") << std::setw(14) << ("MSE(" + e.name + ")")
       << std::setw(22) << ("CI(" + e.name + ")");
  }
  os << '\n';
  for (const auto& row : rows) {
    os << std::setw(10)
       << (two ? std::to_string(row.sizes.m) + "," + std::to_string(row.sizes.n)
               : std::to_string(row.sizes.m));
    for (const auto& e : row.estimands) {
      os << std::setw(14) << fmt4(e.bias) << std::setw(14) << fmt4(e.mse) << std::setw(22)
         << ("(" + fmt4(e.interval.lo) + "," + fmt4(e.interval.hi) + ")");
    }
    os << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json params_json(const Params& p) { return {{"sigma", p.sigma()}, {"pi", p.pi()}}; }

nlohmann::json prior_json(const bayes::PriorSpec& p) {
  return {{"tau", p.tau()}, {"delta", p.delta()}, {"alpha", p.alpha()}, {"beta", p.beta()}};
}

Params params_from(const nlohmann::json& j) {
  return Params(j.at("sigma").get<double>(), j.at("pi").get<double>());
}

bayes::PriorSpec prior_from(const nlohmann::json& j) {
  return bayes::PriorSpec(j.at("tau").get<double>(), j.at("delta").get<double>(),
                          j.at("alpha").get<double>(), j.at("beta").get<double>());
}

}  // namespace

nlohmann::json to_json(const SimConfig& cfg) {
  nlohmann::json j;
  if (const auto* p = std::get_if<Params>(&cfg.truth)) {
    j["truth"] = params_json(*p);
  } else {
    const auto& tp = std::get<reliability::TwoSampleParams>(cfg.truth);
    j["truth"] = {{"strength", params_json(tp.strength)}, {"stress", params_json(tp.stress)}};
  }
  auto sizes = nlohmann::json::array();
  for (const auto& s : cfg.sizes) {
    if (s.n > 0) {
      sizes.push_back({s.m, s.n});
    } else {
      sizes.push_back(s.m);
    }
  }
  j["sizes"] = sizes;
  j["replicates"] = cfg.replicates;
  if (cfg.prior) j["prior"] = prior_json(*cfg.prior);
  if (cfg.stress_prior) j["stress_prior"] = prior_json(*cfg.stress_prior);
  j["posterior_draws"] = cfg.posterior_draws;
  j["seed"] = cfg.seed;
  j["level"] = cfg.level;
  j["threads"] = cfg.threads;
  return j;
}

nlohmann::json to_json(const std::vector<SimRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["m"] = row.sizes.m;
    if (row.sizes.n > 0) r["n"] = row.sizes.n;
    r["n_failures"] = row.n_failures;
    for (const auto& e : row.estimands) {
      r["estimands"][e.name] = {{"truth", e.truth},          {"bias", e.bias},
                                {"mse", e.mse},              {"interval", {e.interval.lo, e.interval.hi}},
                                {"coverage", e.coverage},    {"bias_se", e.bias_se},
                                {"mse_se", e.mse_se},        {"used", e.used}};
    }
    arr.push_back(r);
  }
  return arr;
}

SimConfig config_from_json(const nlohmann::json& j) {
  try {
    SimConfig cfg;
    const auto& truth = j.at("truth");
    const bool two = truth.contains("strength");
    if (two) {
      cfg.truth = reliability::TwoSampleParams{params_from(truth.at("strength")),
                                               params_from(truth.at("stress"))};
    } else {
      cfg.truth = params_from(truth);
    }
    for (const auto& s : j.at("sizes")) {
      if (s.is_array()) {
        if (s.size() != 2) throw std::invalid_argument("size pairs must have two entries");
        cfg.sizes.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      } else {
        cfg.sizes.push_back({s.get<std::size_t>(), 0});
      }
      const auto& last = cfg.sizes.back();
      if (last.m < 2 || (two && last.n < 2) || (!two && last.n != 0)) {
        throw std::invalid_argument("sample sizes must be >= 2 and match the truth layout");
      }
    }
    if (cfg.sizes.empty()) throw std::invalid_argument("no sample sizes");
    cfg.replicates = j.value("replicates", cfg.replicates);
    if (cfg.replicates == 0) throw std::invalid_argument("replicates must be positive");
    cfg.posterior_draws = j.value("posterior_draws", cfg.posterior_draws);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.level = j.value("level", cfg.level);
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("prior")) cfg.prior = prior_from(j.at("prior"));
    if (j.contains("stress_prior")) cfg.stress_prior = prior_from(j.at("stress_prior"));
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("simulation config: ") + e.what());
  }
}

}  // namespace loglindley::simulation
