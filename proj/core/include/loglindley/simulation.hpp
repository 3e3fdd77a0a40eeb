#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "loglindley/bayes.hpp"
#include "loglindley/distribution.hpp"
#include "loglindley/reliability.hpp"
#include "loglindley/stats.hpp"

namespace loglindley::simulation {

/// Sample sizes of one study row; n is 0 for one-sample studies.
struct SampleSizes {
  std::size_t m = 0;
  std::size_t n = 0;
  friend bool operator==(const SampleSizes&, const SampleSizes&) = default;
};

struct SimConfig {
  std::variant<Params, reliability::TwoSampleParams> truth = Params(1.0, 0.2);
  std::vector<SampleSizes> sizes;
  std::size_t replicates = 1000;
  /// Prior of the one-sample studies, or of the strength group.
  std::optional<bayes::PriorSpec> prior;
  /// Prior of the stress group in reliability studies.
  std::optional<bayes::PriorSpec> stress_prior;
  std::size_t posterior_draws = 10000;
  std::uint64_t seed = 0;
  double level = 0.95;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// A row aborts when more than this fraction of replicates fails.
  double max_failure_fraction = 0.2;
};

/// Monte Carlo summary of one estimator at one row.
struct EstimandSummary {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  /// Replicate-averaged interval end points (raw, unclamped).
  Interval interval;
  double coverage = 0.0;
  /// Monte Carlo standard errors of bias and mse.
  double bias_se = 0.0;
  double mse_se = 0.0;
  std::size_t used = 0;
  std::size_t failures = 0;
};

struct SimRow {
  SampleSizes sizes;
  std::vector<EstimandSummary> estimands;
  std::size_t n_failures = 0;

  /// Throws std::out_of_range for unknown names.
  const EstimandSummary& at(std::string_view name) const;
};

/// ML bias/MSE/Wald-interval study (estimands "sigma", "pi").
std::vector<SimRow> run_ml_study(const SimConfig& cfg);

/// Exact-posterior study: posterior means and equal-tailed credible intervals
/// (estimands "sigma", "pi"). Uses the preset prior when cfg.prior is unset.
/// Replicates share their data streams with run_ml_study for the same cfg.
std::vector<SimRow> run_bayes_study(const SimConfig& cfg);

/// Reliability study with ML plug-in and posterior-draw estimates
/// (estimands "R_ML", "R_Bayes").
std::vector<SimRow> run_reliability_study(const SimConfig& cfg);

/// Hyper-parameters whose prior means equal the generating values, for the
/// tabulated sigma in {1, 2.5, 3.5} and pi in {0.2, 0.5, 0.7}.
bayes::PriorSpec preset_prior(const Params& truth);

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

void write_csv(std::ostream& os, const std::vector<SimRow>& rows);
/// Fixed four-decimal human-readable table.
std::string format_table(const std::vector<SimRow>& rows);

nlohmann::json to_json(const SimConfig& cfg);
nlohmann::json to_json(const std::vector<SimRow>& rows);
/// Throws std::invalid_argument on schema violations.
SimConfig config_from_json(const nlohmann::json& j);

}  // namespace loglindley::simulation
