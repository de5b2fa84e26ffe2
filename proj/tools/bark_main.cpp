#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bark/analysis.hpp"
#include "bark/serialize.hpp"

namespace fs = std::filesystem;
using bark::Json;

namespace {

// BARK_LOG: error < warn < info < debug; default warn.
int log_threshold() {
  static int level = [] {
    const char* env = std::getenv("BARK_LOG");
    std::string s = env ? env : "warn";
    if (s == "error") return 0;
    if (s == "warn") return 1;
    if (s == "info") return 2;
    if (s == "debug") return 3;
    return 1;
  }();
  return level;
}

void log_at(int level, const std::string& msg) {
  if (log_threshold() >= level) std::cerr << "[bark] " << msg << "\n";
}
void log_info(const std::string& msg) { log_at(2, msg); }
void log_debug(const std::string& msg) { log_at(3, msg); }

struct GlobalOptions {
  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::int64_t> seed;
  std::optional<int> threads;
  std::optional<double> time_limit;
  std::optional<double> rel_gap;
  std::optional<double> kappa;
  bool prior_only = false;
  bool data_splits = false;
};

// The merged configuration document every command reads.
struct RunConfig {
  std::optional<bark::SpaceDoc> space;
  bark::BoConfig bo;
  std::string benchmark;
  bool desk_scale = true;
  std::vector<std::uint64_t> seeds = {0};
  double test_fraction = 0.2;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_json_file(const fs::path& path, const Json& j) {
  write_file(path, j.dump(2) + "\n");
}

RunConfig load_run_config(const GlobalOptions& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) {
    Json j = read_json_file(opt.config_path);
    if (!j.is_object()) throw std::invalid_argument("config: expected an object");
    for (const auto& item : j.items()) {
      const std::string& key = item.key();
      if (key == "space") {
        cfg.space = bark::space_from_json(item.value());
      } else if (key == "bo") {
        cfg.bo = bark::bo_config_from_json(item.value());
      } else if (key == "benchmark") {
        cfg.benchmark = item.value().get<std::string>();
      } else if (key == "desk_scale") {
        cfg.desk_scale = item.value().get<bool>();
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const Json& s : item.value())
          cfg.seeds.push_back(s.get<std::uint64_t>());
        if (cfg.seeds.empty())
          throw std::invalid_argument("config: 'seeds' must be nonempty");
      } else if (key == "test_fraction") {
        cfg.test_fraction = item.value().get<double>();
      } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
      }
    }
  }
  if (opt.seed) {
    cfg.bo.seed = static_cast<std::uint64_t>(*opt.seed);
    cfg.seeds = {cfg.bo.seed};
  }
  if (opt.threads) cfg.bo.sampler.threads = *opt.threads;
  if (opt.time_limit) cfg.bo.acq.time_limit_s = *opt.time_limit;
  if (opt.rel_gap) cfg.bo.acq.rel_gap = *opt.rel_gap;
  if (opt.kappa) cfg.bo.acq.kappa = *opt.kappa;
  if (opt.prior_only) cfg.bo.prior_only = true;
  if (opt.data_splits) cfg.bo.sampler.data_splits = true;
  return cfg;
}

bark::SpaceDoc resolve_space(const std::string& space_path,
                             const RunConfig& cfg) {
  if (!space_path.empty())
    return bark::space_from_json(read_json_file(space_path));
  if (cfg.space) return *cfg.space;
  throw std::invalid_argument(
      "no search space: pass a space.json or put 'space' in the config");
}

fs::path prepare_output_dir(const GlobalOptions& opt) {
  fs::path dir(opt.output_dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const GlobalOptions& opt, const std::string& data_path,
            const std::string& space_path) {
  RunConfig cfg = load_run_config(opt);
  bark::SpaceDoc doc = resolve_space(space_path, cfg);

  std::ifstream in(data_path);
  if (!in) throw std::invalid_argument("cannot open " + data_path);
  bark::ParsedDataset parsed = bark::dataset_from_csv(in, doc);
  log_info("fit: " + std::to_string(parsed.X.size()) + " rows, " +
           std::to_string(doc.space.dim()) + " features");

  bark::RegressionMetrics metrics = bark::regression_eval(
      doc.space, parsed.X, parsed.y, cfg.bo.seed, cfg.bo.sampler,
      cfg.test_fraction);

  // A second fit on the full dataset supplies the chain diagnostics.
  bark::Dataset full = bark::standardize(parsed.X, parsed.y);
  bark::NoisePrior prior =
      bark::make_noise_prior(cfg.bo.sampler.nu, cfg.bo.sampler.q);
  bark::RunStats stats;
  bark::PosteriorEnsemble ens = bark::run_chains(
      doc.space, full, cfg.bo.sampler, prior, cfg.bo.seed, nullptr, &stats);

  Json autocorr = Json::array();
  for (const std::vector<double>& trace : stats.mll_traces) {
    if (static_cast<int>(trace.size()) > 50)
      autocorr.push_back(bark::autocorrelation(trace, 50)[50]);
    else
      autocorr.push_back(nullptr);
  }

  Json out{{"mll_autocorr_lag50", std::move(autocorr)},
           {"mse", metrics.mse},
           {"n_states", ens.size()},
           {"n_test", metrics.n_test},
           {"n_train", metrics.n_train},
           {"nlpd", metrics.nlpd}};

  fs::path dir = prepare_output_dir(opt);
  write_json_file(dir / "metrics.json", out);
  write_file(dir / "diagnostics.csv", bark::diagnostics_csv(stats));
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// optimize

int cmd_optimize(const GlobalOptions& opt, std::string benchmark_name) {
  RunConfig cfg = load_run_config(opt);
  if (benchmark_name.empty()) benchmark_name = cfg.benchmark;
  if (benchmark_name.empty())
    throw std::invalid_argument("optimize: no benchmark named");

  std::vector<bark::RegretRow> rows;
  std::vector<std::vector<double>> best_traces;
  std::optional<double> optimum;
  for (std::uint64_t seed : cfg.seeds) {
    bark::Benchmark bench =
        bark::make_benchmark(benchmark_name, cfg.desk_scale, seed);
    optimum = bench.optimum;
    bark::BoConfig bo = cfg.bo;
    bo.seed = seed;
    log_info("optimize: " + bench.name + " seed " + std::to_string(seed));
    bark::LoopResult result = bark::run_loop(bench.space, bench.objective, bo);
    if (result.aborted)
      throw std::runtime_error("objective failed: " + result.error);

    std::vector<double> best;
    for (std::size_t i = 0; i < result.session.trace.size(); ++i) {
      const bark::IterationRecord& rec = result.session.trace[i];
      bark::RegretRow row;
      row.benchmark = bench.name;
      row.seed = seed;
      row.iteration = static_cast<int>(i);
      row.best_so_far = rec.best_so_far;
      row.regret = optimum ? rec.best_so_far - *optimum
                           : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(std::move(row));
      best.push_back(rec.best_so_far);
    }
    best_traces.push_back(std::move(best));
  }

  bark::RegretSummary summary =
      bark::regret_report(best_traces, optimum.value_or(0.0));
  Json out{{"benchmark", benchmark_name},
           {"metric", optimum ? "regret" : "best_so_far"},
           {"n_seeds", cfg.seeds.size()},
           {"summary", bark::regret_summary_to_json(summary)}};

  fs::path dir = prepare_output_dir(opt);
  write_file(dir / "trace.csv", bark::regret_csv(rows));
  write_json_file(dir / "summary.json", out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ask/tell session commands

int cmd_init(const GlobalOptions& opt, const std::string& space_path,
             const std::string& session_path) {
  RunConfig cfg = load_run_config(opt);
  bark::SpaceDoc doc = resolve_space(space_path, cfg);
  bark::BoSession session = bark::initialize(doc.space, nullptr, cfg.bo);
  write_json_file(session_path, bark::session_to_json(session, doc));
  Json out{{"n_init", session.n_init_total}};
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_ask(const GlobalOptions& opt, const std::string& session_path) {
  (void)opt;
  auto [session, doc] = bark::session_from_json(read_json_file(session_path));
  bark::Point x = bark::ask(session);
  Json out{{"x", x}};
  if (session.pending && session.pending->x == x) {
    out["acq_value"] = session.pending->acq_value;
    out["gap"] = std::isfinite(session.pending->gap)
                     ? Json(session.pending->gap)
                     : Json(nullptr);
  }
  write_json_file(session_path, bark::session_to_json(session, doc));
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_tell(const GlobalOptions& opt, const std::string& session_path,
             const std::string& x_json, double y) {
  (void)opt;
  auto [session, doc] = bark::session_from_json(read_json_file(session_path));
  Json jx;
  try {
    jx = Json::parse(x_json);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("tell: bad point: ") + e.what());
  }
  if (!jx.is_array()) throw std::invalid_argument("tell: point must be an array");
  bark::Point x;
  for (const Json& v : jx) {
    if (!v.is_number()) throw std::invalid_argument("tell: point must be numeric");
    x.push_back(v.get<double>());
  }
  bark::tell(session, x, y);
  write_json_file(session_path, bark::session_to_json(session, doc));
  Json out{{"observations", session.observation_count()}};
  std::cout << out.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct CheckReport {
  int failures = 0;
  void check(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << ": " << detail << "\n";
    if (!ok) ++failures;
  }
};

int verify_kernel_limit(const GlobalOptions& opt, std::uint64_t seed) {
  bark::LimitConfig config;
  config.lambda = 1.0;
  config.dim = 2;
  config.n_trees = 20000;
  for (int i = 1; i <= 10; ++i) {
    double t = 0.1 * i;
    config.probes.emplace_back(bark::Point{0.0, 0.0},
                               bark::Point{t / 2, t / 2});
  }
  bark::Rng rng = bark::make_rng(seed, 7);
  std::vector<bark::LimitCurvePoint> curve = bark::laplace_limit_mc(config, rng);

  CheckReport report;
  for (const bark::LimitCurvePoint& p : curve) {
    double err = std::abs(p.empirical - p.theoretical);
    double band = 5.0 * p.std_error;
    std::ostringstream detail;
    detail << "|dx|_1=" << p.l1 << " empirical=" << p.empirical
           << " theoretical=" << p.theoretical << " 5SE=" << band;
    report.check(err <= band, "laplace-limit", detail.str());
  }

  fs::path dir = prepare_output_dir(opt);
  write_file(dir / "kernel_curve.csv",
             bark::kernel_curve_csv(bark::kernel_comparison_curve(0.95, 2.0)));
  return report.failures == 0 ? 0 : 1;
}

int verify_chopping(std::uint64_t seed) {
  CheckReport report;
  const std::int64_t n_runs = 200000;
  for (double x : {0.1, 0.3, 0.5, 0.9}) {
    bark::Rng rng = bark::make_rng(seed, 11, static_cast<std::uint64_t>(x * 100));
    std::vector<double> mc = bark::chopping_simulation(x, 6, n_runs, rng);
    for (int d = 1; d <= 6; ++d) {
      double p = bark::chopping_split_probability(x, d);
      double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_runs));
      double err = std::abs(mc[d - 1] - p);
      std::ostringstream detail;
      detail << "x=" << x << " d=" << d << " mc=" << mc[d - 1]
             << " closed=" << p << " 5SE=" << 5.0 * se;
      report.check(err <= 5.0 * se, "chopping-mc", detail.str());
    }
  }
  double total = 0.0;
  for (int d = 1; d <= 50; ++d)
    total += bark::chopping_split_probability(0.3, d);
  std::ostringstream detail;
  detail << "sum_d Pr(S_d) at x=0.3 = " << total;
  report.check(std::abs(total - 1.0) <= 1e-12, "chopping-normalization",
               detail.str());
  return report.failures == 0 ? 0 : 1;
}

int verify_lowrank(std::uint64_t seed) {
  std::vector<bark::FeatureSpec> specs;
  for (int f = 0; f < 3; ++f)
    specs.push_back(bark::FeatureSpec::continuous(0.0, 1.0));
  bark::FeatureSpace space{std::move(specs)};

  bark::Rng rng = bark::make_rng(seed, 13);
  const int n = 200;
  std::vector<bark::Point> X = bark::sample_uniform(space, n, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y;
  for (const bark::Point& x : X)
    y.push_back(std::sin(6.0 * x[0]) + 0.3 * noise(rng));
  bark::Dataset data = bark::standardize(std::move(X), std::move(y));

  const int m = 10;
  bark::UniformSplits splits;
  bark::Forest forest = bark::sample_forest_prior(space, m, 0.95, 2.0, rng, splits);
  bark::GpState state = bark::make_gp_state(std::move(forest), 0.1, data);

  double worst = 0.0;
  const int n_proposals = 500;
  for (int i = 0; i < n_proposals; ++i) {
    int t = i % m;
    bark::Tree proposal = bark::sample_tree_prior(space, 0.95, 2.0, rng);
    bark::TreeUpdateCandidate fast =
        bark::update_tree_lowrank(state, data, t, proposal);
    bark::TreeUpdateCandidate dense =
        bark::update_tree_dense(state, data, t, std::move(proposal));
    worst = std::max(worst, std::abs(fast.delta_mll - dense.delta_mll));
  }
  CheckReport report;
  std::ostringstream detail;
  detail << "max |delta_mll difference| over " << n_proposals
         << " proposals at N=" << n << " is " << worst;
  report.check(worst <= 1e-8, "lowrank-delta-mll", detail.str());
  return report.failures == 0 ? 0 : 1;
}

int verify_oracle(std::uint64_t seed) {
  std::vector<bark::FeatureSpec> specs;
  specs.push_back(bark::FeatureSpec::continuous(0.0, 1.0));
  specs.push_back(bark::FeatureSpec::continuous(0.0, 1.0));
  specs.push_back(bark::FeatureSpec::categorical(3));
  bark::FeatureSpace space{std::move(specs)};

  CheckReport report;
  for (int instance = 0; instance < 20; ++instance) {
    bark::Rng rng = bark::make_rng(seed, 17, instance);

    std::vector<bark::Point> X = bark::sample_uniform(space, 8, rng);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> y;
    for (std::size_t i = 0; i < X.size(); ++i) y.push_back(noise(rng));
    bark::Dataset data = bark::standardize(std::move(X), std::move(y));

    bark::PosteriorEnsemble ens;
    bark::UniformSplits rules;
    for (int s = 0; s < 2; ++s) {
      bark::Forest forest;
      int splits;
      do {
        forest = bark::sample_forest_prior(space, 3, 0.9, 1.2, rng, rules, 2);
        splits = 0;
        for (const bark::Tree& tree : forest.trees)
          splits += tree.decision_count();
      } while (splits > 6);
      ens.states.push_back(
          bark::make_gp_state(std::move(forest), 0.05 + 0.1 * s, data));
    }

    bark::AcqConfig exact;
    exact.rel_gap = 0.0;
    bark::Rng acq_rng = bark::make_rng(seed, 19, instance);
    bark::AcqResult bnb = bark::maximize_acquisition(ens, space, exact, acq_rng);
    bark::AcqResult oracle = bark::exhaustive_oracle(ens, space, exact.kappa);

    double err = std::abs(bnb.value - oracle.value);
    std::ostringstream detail;
    detail << "instance " << instance << " bnb=" << bnb.value
           << " oracle=" << oracle.value << " nodes=" << bnb.nodes_explored;
    report.check(err <= 1e-9, "bnb-exactness", detail.str());
  }
  return report.failures == 0 ? 0 : 1;
}

int cmd_verify(const GlobalOptions& opt, const std::string& which) {
  RunConfig cfg = load_run_config(opt);
  std::uint64_t seed = cfg.bo.seed;
  if (which == "kernel-limit") return verify_kernel_limit(opt, seed);
  if (which == "chopping") return verify_chopping(seed);
  if (which == "lowrank") return verify_lowrank(seed);
  if (which == "oracle") return verify_oracle(seed);
  throw std::invalid_argument("verify: unknown check '" + which +
                              "' (kernel-limit | chopping | lowrank | oracle)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-kernel Gaussian process Bayesian optimization"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  GlobalOptions opt;
  app.add_option("--config", opt.config_path, "JSON configuration file")
      ->configurable(false);
  app.add_option("--seed", opt.seed, "Override the run seed");
  app.add_option("--threads", opt.threads, "Sampler worker thread cap");
  app.add_option("--output", opt.output_dir, "Directory for output artifacts");
  app.add_option("--time-limit", opt.time_limit,
                 "Acquisition time limit in seconds");
  app.add_option("--rel-gap", opt.rel_gap, "Acquisition relative gap target");
  app.add_option("--kappa", opt.kappa, "UCB exploration weight");
  app.add_flag("--prior-only", opt.prior_only,
               "Sample kernels from the prior instead of running MCMC");
  app.add_flag("--data-splits", opt.data_splits,
               "Draw split rules from the data (ablation)");

  std::string data_path, space_path, benchmark_name, session_path, x_json,
      which;
  double y_value = 0.0;

  CLI::App* fit = app.add_subcommand("fit", "Fit the surrogate to a dataset");
  fit->add_option("data", data_path, "Dataset CSV")->required();
  fit->add_option("space", space_path, "Search-space JSON");

  CLI::App* optimize =
      app.add_subcommand("optimize", "Run the BO loop on a benchmark");
  optimize->add_option("benchmark", benchmark_name, "Benchmark name");

  CLI::App* init = app.add_subcommand("init", "Create an ask/tell session");
  init->add_option("session", session_path, "Session file to create")
      ->required();
  init->add_option("--space", space_path, "Search-space JSON");

  CLI::App* ask_cmd = app.add_subcommand("ask", "Propose the next point");
  ask_cmd->add_option("session", session_path, "Session file")->required();

  CLI::App* tell_cmd = app.add_subcommand("tell", "Record an observation");
  tell_cmd->add_option("session", session_path, "Session file")->required();
  tell_cmd->add_option("x", x_json, "Point as a JSON array")->required();
  tell_cmd->add_option("y", y_value, "Observed objective value")->required();

  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("which", which,
                     "kernel-limit | chopping | lowrank | oracle")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(opt, data_path, space_path);
    if (optimize->parsed()) return cmd_optimize(opt, benchmark_name);
    if (init->parsed()) return cmd_init(opt, space_path, session_path);
    if (ask_cmd->parsed()) return cmd_ask(opt, session_path);
    if (tell_cmd->parsed()) return cmd_tell(opt, session_path, x_json, y_value);
    if (verify->parsed()) return cmd_verify(opt, which);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
