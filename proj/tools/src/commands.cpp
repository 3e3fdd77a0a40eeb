#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "loglindley/bayes.hpp"
#include "loglindley/mle.hpp"
#include "loglindley/reliability.hpp"
#include "loglindley/simulation.hpp"

#ifndef LOGLINDLEY_VERSION
#define LOGLINDLEY_VERSION "unknown"
#endif

namespace loglindley::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stream tags keep the random streams of different commands apart.
enum Stream : std::uint64_t { fit_draws = 1, reliability_draws = 2, trace_chains = 3, trace_exact = 4, generate_data = 5 };

struct PriorFlags {
  std::optional<double> tau, delta, alpha, beta;

  void attach(CLI::App& app, const std::string& suffix, const std::string& what) {
    app.add_option("--prior-tau" + suffix, tau, "Gamma rate of the sigma prior" + what);
    app.add_option("--prior-delta" + suffix, delta, "Gamma shape of the sigma prior" + what);
    app.add_option("--prior-alpha" + suffix, alpha, "Beta shape a of the pi prior" + what);
    app.add_option("--prior-beta" + suffix, beta, "Beta shape b of the pi prior" + what);
  }

  bayes::PriorSpec get(const std::string& suffix) const {
    std::string missing;
    const std::pair<const char*, const std::optional<double>*> all[] = {
        {"tau", &tau}, {"delta", &delta}, {"alpha", &alpha}, {"beta", &beta}};
    for (const auto& [name, v] : all)
      if (!v->has_value()) missing += " --prior-" + std::string(name) + suffix;
    if (!missing.empty()) throw InputError("Bayes method needs the prior flags:" + missing);
    try {
      return bayes::PriorSpec(*tau, *delta, *alpha, *beta);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
};

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json prior_json(const bayes::PriorSpec& p) {
  return {{"tau", p.tau()}, {"delta", p.delta()}, {"alpha", p.alpha()}, {"beta", p.beta()}};
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError(path + ": cannot open for writing");
  f << text;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("--level must lie in (0, 1)");
}

Sample one_group(const Dataset& ds, const std::string& group) {
  if (!group.empty()) {
    if (!ds.grouped) throw InputError("--group given but the input has no group column");
    return ds.group(group);
  }
  if (ds.grouped && ds.labels().size() > 1) {
    throw InputError("input has several groups; select one with --group");
  }
  return ds.all();
}

// fit -----------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string method = "ml";
  std::string group;
  double scale = 1.0;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::size_t draws = 0;
  std::string out;
  PriorFlags prior;
};

json fit_ml_json(const mle::FitResultML& f) {
  return {{"method", "ML"},
          {"m", f.m},
          {"estimate", {{"sigma", f.estimate.sigma()}, {"pi", f.estimate.pi()}}},
          {"covariance",
           {{"sigma_sigma", f.covariance.xx}, {"sigma_pi", f.covariance.xy}, {"pi_pi", f.covariance.yy}}},
          {"ci_sigma", interval_json(f.ci_sigma)},
          {"ci_pi", interval_json(f.ci_pi)},
          {"ci_pi_raw", interval_json(f.ci_pi_raw)},
          {"loglik", f.loglik},
          {"boundary", f.boundary},
          {"iterations", f.iterations},
          {"level", f.level}};
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  check_level(a.level);
  const Sample x = one_group(load_dataset(a.input, a.scale), a.group);
  json report;
  if (a.method == "ml") {
    if (x.size() < 2) throw InputError("ML fit needs at least two observations");
    mle::FitOptions opt;
    opt.level = a.level;
    mle::FitResultML f;
    try {
      f = mle::fit(x, opt);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    if (!f.converged) throw ConvergenceError("ML fit did not converge");
    report = fit_ml_json(f);
  } else {
    const bayes::PriorSpec prior = a.prior.get("");
    Rng rng = derive_stream(a.seed, {fit_draws});
    const auto f = bayes::fit(x, prior, a.level, a.draws, &rng);
    std::vector<double> weights(f.mixture.components());
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = f.mixture.weight(i);
    report = {{"method", "Bayes"},
              {"m", x.size()},
              {"prior", prior_json(prior)},
              {"estimate", {{"sigma", f.estimate.sigma()}, {"pi", f.estimate.pi()}}},
              {"cri_sigma", interval_json(f.cri_sigma)},
              {"cri_pi", interval_json(f.cri_pi)},
              {"mixture",
               {{"components", f.mixture.components()},
                {"v1", f.mixture.v1()},
                {"gamma_rate", f.mixture.gamma_rate()},
                {"weights", weights}}},
              {"level", a.level}};
    if (a.draws > 0) {
      std::vector<double> s, p;
      for (const auto& d : f.posterior_draws) {
        s.push_back(d.sigma);
        p.push_back(d.pi);
      }
      report["draws"] = {{"n", a.draws}, {"sigma_mean", stats::mean(s)}, {"pi_mean", stats::mean(p)}};
    }
  }
  report["seed"] = a.seed;
  emit(report.dump(2) + "\n", a.out, out);
  return ok;
}

// reliability ---------------------------------------------------------------

struct ReliabilityArgs {
  std::string input;
  std::string method = "ml";
  std::string strength_group;
  double scale = 1.0;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::size_t draws = 10000;
  std::string out;
  PriorFlags prior_x, prior_y;
};

int cmd_reliability(const ReliabilityArgs& a, std::ostream& out) {
  check_level(a.level);
  const Dataset ds = load_dataset(a.input, a.scale);
  if (!ds.grouped) throw InputError(a.input + ": reliability needs a 'group,value' file");
  const auto labels = ds.labels();
  if (labels.size() != 2) {
    throw InputError(a.input + ": expected exactly two groups, found " + std::to_string(labels.size()));
  }
  const std::string sx = a.strength_group.empty() ? labels[0] : a.strength_group;
  if (sx != labels[0] && sx != labels[1]) throw InputError("unknown --strength-group '" + sx + "'");
  const std::string sy = sx == labels[0] ? labels[1] : labels[0];
  const Sample x = ds.group(sx);
  const Sample y = ds.group(sy);

  reliability::ReliabilityReport rep;
  Params ex(1.0, 1.0), ey(1.0, 1.0);
  if (a.method == "ml") {
    if (x.size() < 2 || y.size() < 2) throw InputError("each group needs at least two observations");
    mle::FitOptions opt;
    opt.level = a.level;
    try {
      const auto fx = mle::fit(x, opt);
      const auto fy = mle::fit(y, opt);
      rep = reliability::reliability_ml(fx, fy, a.level);
      ex = fx.estimate;
      ey = fy.estimate;
    } catch (const reliability::FitFailure& e) {
      throw ConvergenceError(std::string(e.what()) + " (group '" + (e.group() == "strength" ? sx : sy) + "')");
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  } else {
    if (a.draws < 1000) throw InputError("--draws must be at least 1000");
    const auto px = bayes::posterior(x, a.prior_x.get("-x"));
    const auto py = bayes::posterior(y, a.prior_y.get("-y"));
    Rng rng = derive_stream(a.seed, {reliability_draws});
    rep = reliability::reliability_bayes(px, py, a.draws, rng, a.level);
    ex = bayes::bayes_estimates(px);
    ey = bayes::bayes_estimates(py);
  }
  rep.seed = a.seed;
  json j = reliability::to_json(rep);
  j["strength_group"] = sx;
  j["stress_group"] = sy;
  j["strength_estimate"] = {{"sigma", ex.sigma()}, {"pi", ex.pi()}};
  j["stress_estimate"] = {{"sigma", ey.sigma()}, {"pi", ey.pi()}};
  emit(j.dump(2) + "\n", a.out, out);
  return ok;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::size_t> replicates;
  std::optional<unsigned> threads;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  std::ifstream in(a.config);
  if (!in) throw InputError(a.config + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(a.config + ": " + e.what());
  }

  simulation::SimConfig cfg;
  std::vector<std::string> studies;
  std::string name;
  try {
    cfg = simulation::config_from_json(j);
    name = j.value("name", fs::path(a.config).stem().string());
    const json study = j.value("study", json("ml"));
    if (study.is_string()) {
      studies.push_back(study.get<std::string>());
    } else {
      studies = study.get<std::vector<std::string>>();
    }
  } catch (const std::exception& e) {
    throw InputError(a.config + ": " + e.what());
  }
  if (a.replicates) cfg.replicates = *a.replicates;
  if (a.threads) cfg.threads = *a.threads;
  if (cfg.replicates == 0) throw InputError("--replicates must be positive");

  const bool two = std::holds_alternative<reliability::TwoSampleParams>(cfg.truth);
  for (const auto& s : studies) {
    if (s != "ml" && s != "bayes" && s != "reliability") {
      throw InputError(a.config + ": unknown study '" + s + "'");
    }
    if ((s == "reliability") != two) {
      throw InputError(a.config + ": study '" + s + "' does not match the truth layout");
    }
  }

  fs::create_directories(a.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  json results = json::object();
  json files = json::array();
  for (const auto& s : studies) {
    std::vector<simulation::SimRow> rows;
    if (s == "ml") {
      rows = simulation::run_ml_study(cfg);
    } else if (s == "bayes") {
      rows = simulation::run_bayes_study(cfg);
    } else {
      rows = simulation::run_reliability_study(cfg);
    }
    const fs::path csv = fs::path(a.out_dir) / (name + "_" + s + ".csv");
    std::ofstream f(csv);
    if (!f) throw InputError(csv.string() + ": cannot open for writing");
    simulation::write_csv(f, rows);
    files.push_back(csv.filename().string());
    results[s] = simulation::to_json(rows);
    out << "[" << name << " / " << s << "]\n" << simulation::format_table(rows) << "\n";
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest = {{"name", name},
                   {"studies", studies},
                   {"config", simulation::to_json(cfg)},
                   {"seed", cfg.seed},
                   {"version", LOGLINDLEY_VERSION},
                   {"wall_time_seconds", wall},
                   {"outputs", files},
                   {"results", results}};
  emit(manifest.dump(2) + "\n", (fs::path(a.out_dir) / (name + "_manifest.json")).string(), out);
  return ok;
}

// trace ---------------------------------------------------------------------

struct TraceArgs {
  std::string input;
  std::string group;
  double scale = 1.0;
  std::uint64_t seed = 1;
  std::size_t chains = 4;
  std::size_t iters = 2500;
  std::optional<std::size_t> warmup;
  std::string out;
  PriorFlags prior;
};

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
  if (a.chains < 2) throw InputError("--chains must be at least 2 for convergence diagnostics");
  if (a.iters < 4) throw InputError("--iters must be at least 4");
  const Sample x = one_group(load_dataset(a.input, a.scale), a.group);
  const auto prior = a.prior.get("");

  bayes::MetropolisOptions opt;
  opt.chains = a.chains;
  opt.iterations = a.iters;
  opt.warmup = a.warmup.value_or(a.iters);
  Rng rng = derive_stream(a.seed, {trace_chains});
  const auto res = bayes::metropolis_check(x, prior, opt, rng);

  std::ostringstream trace;
  trace << std::setprecision(17) << "chain,iter,sigma,pi\n";
  for (std::size_t c = 0; c < res.draws.size(); ++c)
    for (std::size_t k = 0; k < res.draws[c].size(); ++k)
      trace << c + 1 << ',' << k + 1 << ',' << res.draws[c][k].sigma << ',' << res.draws[c][k].pi << '\n';
  emit(trace.str(), a.out, out);

  if (!a.out.empty()) {
    Rng exact_rng = derive_stream(a.seed, {trace_exact});
    const auto draws = bayes::sample_posterior(bayes::posterior(x, prior), a.chains * a.iters, exact_rng);
    std::ostringstream exact;
    exact << std::setprecision(17) << "draw,sigma,pi\n";
    for (std::size_t k = 0; k < draws.size(); ++k)
      exact << k + 1 << ',' << draws[k].sigma << ',' << draws[k].pi << '\n';
    fs::path p(a.out);
    emit(exact.str(), (p.parent_path() / (p.stem().string() + "_exact" + p.extension().string())).string(), out);
  }

  std::ostream& summary = a.out.empty() ? err : out;
  summary << std::fixed << std::setprecision(4) << "rhat_sigma=" << res.rhat_sigma
          << " rhat_pi=" << res.rhat_pi << std::setprecision(1) << " ess_sigma=" << res.ess_sigma
          << " ess_pi=" << res.ess_pi << '\n';
  if (res.rhat_warning) err << "warning: split-Rhat exceeds 1.01; chains may not have mixed\n";
  return ok;
}

// generate ------------------------------------------------------------------

struct GenerateArgs {
  double sigma = 1.0, pi = 0.2;
  std::size_t m = 100;
  std::optional<double> sigma2, pi2;
  std::optional<std::size_t> n;
  std::vector<std::string> labels{"X", "Y"};
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const bool two = a.sigma2 || a.pi2 || a.n;
  if (two && !(a.sigma2 && a.pi2 && a.n)) throw InputError("a second group needs --sigma2, --pi2 and --n");
  if (a.labels.size() != 2) throw InputError("--labels takes exactly two labels");
  Params px(1.0, 0.0);
  std::optional<Params> py;
  try {
    px = Params(a.sigma, a.pi);
    if (two) py = Params(*a.sigma2, *a.pi2);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  Rng rng = derive_stream(a.seed, {generate_data});
  std::ostringstream os;
  os << std::setprecision(17);
  const Sample x = sample(px, a.m, rng);
  if (!two) {
    os << "value\n";
    for (double v : x.values()) os << v << '\n';
  } else {
    const Sample y = sample(*py, *a.n, rng);
    os << "group,value\n";
    for (double v : x.values()) os << a.labels[0] << ',' << v << '\n';
    for (double v : y.values()) os << a.labels[1] << ',' << v << '\n';
  }
  emit(os.str(), a.out, out);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference for the log-Lindley distribution and stress-strength reliability", "loglindley"};
  app.set_version_flag("--version", LOGLINDLEY_VERSION);
  app.require_subcommand(1);

  const std::map<std::string, std::string> methods{{"ml", "ml"}, {"bayes", "bayes"}};

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit one sample by ML or exact Bayes");
  fit->add_option("input", fa.input, "CSV file with header 'value' or 'group,value'")->required();
  fit->add_option("--method", fa.method, "ml or bayes")->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
  fit->add_option("--group", fa.group, "Group label to fit in a two-group file");
  fit->add_option("--scale", fa.scale, "Divide every value by this before validation");
  fit->add_option("--seed", fa.seed, "Seed for posterior draws");
  fit->add_option("--level", fa.level, "Interval level");
  fit->add_option("--draws", fa.draws, "Posterior draws to summarize (Bayes)");
  fit->add_option("--out", fa.out, "Write the JSON report here instead of stdout");
  fa.prior.attach(*fit, "", "");

  ReliabilityArgs ra;
  auto* rel = app.add_subcommand("reliability", "Estimate R = P(Y < X) and D = 1 - 2R for two groups");
  rel->add_option("input", ra.input, "CSV file with header 'group,value'")->required();
  rel->add_option("--method", ra.method, "ml or bayes")->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
  rel->add_option("--strength-group", ra.strength_group, "Label of the strength group X (default: first label)");
  rel->add_option("--scale", ra.scale, "Divide every value by this before validation");
  rel->add_option("--seed", ra.seed, "Seed for posterior draws");
  rel->add_option("--level", ra.level, "Interval level");
  rel->add_option("--draws", ra.draws, "Joint posterior draws (Bayes, >= 1000)");
  rel->add_option("--out", ra.out, "Write the JSON report here instead of stdout");
  ra.prior_x.attach(*rel, "-x", " (strength)");
  ra.prior_y.attach(*rel, "-y", " (stress)");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study from a JSON config");
  sim->add_option("config", sa.config, "Study configuration (JSON)")->required();
  sim->add_option("--out", sa.out_dir, "Output directory for CSV tables and the manifest");
  sim->add_option("--replicates", sa.replicates, "Override the replicate count");
  sim->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");

  TraceArgs ta;
  auto* tr = app.add_subcommand("trace", "Export random-walk Metropolis traces with split-Rhat");
  tr->add_option("input", ta.input, "CSV file")->required();
  tr->add_option("--group", ta.group, "Group label in a two-group file");
  tr->add_option("--scale", ta.scale, "Divide every value by this before validation");
  tr->add_option("--seed", ta.seed, "Seed");
  tr->add_option("--chains", ta.chains, "Number of chains (>= 2)");
  tr->add_option("--iters", ta.iters, "Kept iterations per chain");
  tr->add_option("--warmup", ta.warmup, "Warm-up iterations per chain (default: --iters)");
  tr->add_option("--out", ta.out, "Trace CSV; exact draws go to <stem>_exact.csv");
  ta.prior.attach(*tr, "", "");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a synthetic one- or two-group CSV");
  gen->add_option("--sigma", ga.sigma, "sigma of the first group");
  gen->add_option("--pi", ga.pi, "pi of the first group");
  gen->add_option("--m", ga.m, "Size of the first group");
  gen->add_option("--sigma2", ga.sigma2, "sigma of the second group");
  gen->add_option("--pi2", ga.pi2, "pi of the second group");
  gen->add_option("--n", ga.n, "Size of the second group");
  gen->add_option("--labels", ga.labels, "Two group labels")->delimiter(',');
  gen->add_option("--seed", ga.seed, "Seed");
  gen->add_option("--out", ga.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : input_error;
  }

  try {
    if (*fit) return cmd_fit(fa, out);
    if (*rel) return cmd_reliability(ra, out);
    if (*sim) return cmd_simulate(sa, out);
    if (*tr) return cmd_trace(ta, out, err);
    if (*gen) return cmd_generate(ga, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return convergence_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
  return failure;
}

}  // namespace loglindley::cli
