#include "cli.hpp"

#include "sa_lab/bounds.hpp"
#include "sa_lab/error.hpp"
#include "sa_lab/experiments.hpp"
#include "sa_lab/io.hpp"
#include "sa_lab/markov.hpp"
#include "sa_lab/rl.hpp"
#include "sa_lab/sa.hpp"
#include "sa_lab/schedule.hpp"
#include "sa_lab/stability.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

namespace salab::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

std::string num(double v) { return io::format_double(v); }

// ---------------------------------------------------------------------------
// Model sources shared by stability / run / bounds

struct ModelFlags {
  bool baird = false;
  std::string reward = "zero";
  std::uint64_t reward_seed = 7;
  bool normalize = false;
  std::string mdp;
  std::string features;
  std::string policy = "uniform";
  double gamma = 0.7;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* baird_opt = nullptr;
  CLI::Option* mdp_opt = nullptr;
};

void add_model_flags(CLI::App* sub, ModelFlags& f) {
  f.baird_opt = sub->add_flag("--baird", f.baird, "Use the built-in seven-state Baird MDP");
  sub->add_option("--reward", f.reward, "Baird reward: zero or random")
      ->check(CLI::IsMember({"zero", "random"}))
      ->capture_default_str();
  sub->add_option("--reward-seed", f.reward_seed, "Seed for random Baird rewards")->capture_default_str();
  sub->add_flag("--normalize-features", f.normalize, "Divide Baird features by their largest row norm");
  f.mdp_opt = sub->add_option("--mdp", f.mdp, "MDP JSON file")->check(CLI::ExistingFile);
  sub->add_option("--features", f.features, "Feature file (.json or .csv)")->check(CLI::ExistingFile);
  sub->add_option("--policy", f.policy, "Behavior policy: 'uniform' or a JSON file")->capture_default_str();
  f.gamma_opt = sub->add_option("--gamma", f.gamma, "Discount factor (overrides the MDP file)")
                    ->check(CLI::Range(0.0, 1.0));
  f.baird_opt->excludes(f.mdp_opt);
}

struct LoadedModel {
  Mdp mdp;
  LinearFeatures features;
  Policy policy;
  std::string source;
};

bool has_model(const ModelFlags& f) { return f.baird || !f.mdp.empty(); }

LoadedModel load_model(const ModelFlags& f) {
  if (f.baird) {
    BairdSpec spec;
    spec.reward = f.reward == "random" ? RewardMode::UniformRandom : RewardMode::Zero;
    spec.reward_seed = f.reward_seed;
    spec.gamma = f.gamma;
    spec.normalize_features = f.normalize;
    BairdModel m = build_baird(spec);
    return {std::move(m.mdp), std::move(m.features), std::move(m.behavior), "baird"};
  }
  if (f.mdp.empty()) throw InvalidInput("give either --baird or --mdp with --features");
  if (f.features.empty()) throw InvalidInput("--mdp needs --features");
  Mdp mdp = io::mdp_from_json(io::read_json(f.mdp));
  if (f.gamma_opt->count() > 0) mdp = mdp.with_gamma(f.gamma);
  LinearFeatures features = io::load_features(f.features, mdp.n_states(), mdp.n_actions());
  Policy policy = io::load_policy(f.policy, mdp.n_states(), mdp.n_actions());
  return {std::move(mdp), std::move(features), std::move(policy), f.mdp};
}

// ---------------------------------------------------------------------------
// chain

struct ChainFlags {
  std::string chain;
  std::size_t k_max = 20;
  std::vector<double> deltas{0.25, 0.1, 0.01};
  double lip = 1.0;
  std::string out = ".";
};

int cmd_chain(const ChainFlags& f, std::ostream& out) {
  const FiniteMarkovChain chain = io::chain_from_json(io::read_json(f.chain));
  if (!check_irreducible_aperiodic(chain)) throw InvalidInput("chain is not irreducible and aperiodic");
  MixingProfile profile(chain);
  const Distribution& mu = profile.stationary();

  json report;
  report["labels"] = chain.labels();
  report["stationary"] = io::to_json(mu.probabilities());

  out << "stationary";
  for (std::size_t x = 0; x < mu.size(); ++x) out << (x ? "," : " ") << num(mu[x]);
  out << "\n\nk,d_max\n";
  json table = json::array();
  for (std::size_t k = 0; k <= f.k_max; ++k) {
    const double d = profile.d_max(k);
    out << k << "," << num(d) << "\n";
    table.push_back({{"k", k}, {"d_max", d}});
  }
  report["d_max"] = table;

  out << "\ndelta,t_mix\n";
  json times = json::array();
  for (double delta : f.deltas) {
    const std::size_t t = profile.mixing_time(delta);
    out << num(delta) << "," << t << "\n";
    times.push_back({{"delta", delta}, {"t_mix", t}});
  }
  report["mixing_times"] = times;

  try {
    const MixingFit fit = fit_geometric_mixing(profile, std::max<std::size_t>(f.k_max, 5));
    const double l1 = fit.l1(f.lip);
    out << "\nfit C=" << num(fit.c_const) << " rho=" << num(fit.rho) << " L1=" << num(l1) << " (L=" << num(f.lip)
        << ")\n";
    report["fit"] = {{"c", fit.c_const}, {"rho", fit.rho}, {"l1", l1}, {"lip", f.lip}};
  } catch (const DegenerateFit& e) {
    out << "\nfit unavailable: " << e.what() << "\n";
    report["fit"] = nullptr;
    report["fit_error"] = e.what();
  }
  io::write_json(fs::path(f.out) / "chain_report.json", report);
  return kOk;
}

// ---------------------------------------------------------------------------
// stability

struct StabilityFlags {
  ModelFlags model;
  std::uint64_t enumeration_cap = 1'000'000;
  bool allow_sampling = false;
  std::uint64_t samples = 100'000;
  std::size_t kappa_restarts = 64;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_stability(const StabilityFlags& f, std::ostream& out) {
  const LoadedModel m = load_model(f.model);
  DeltaPiOptions options;
  options.enumeration_cap = f.enumeration_cap;
  options.allow_sampling = f.allow_sampling;
  options.samples = f.samples;
  options.seed = f.seed;
  options.threads = threads_from_env();
  const StabilityReport report = stability_report(m.features, m.mdp, m.policy, options, f.kappa_restarts, f.seed);
  const json doc = io::to_json(report);
  out << doc.dump(2) << "\n";
  if (!f.out.empty()) io::write_json(fs::path(f.out) / "stability_report.json", doc);
  return report.certified() ? kOk : kCertificateFailed;
}

// ---------------------------------------------------------------------------
// run / bounds

struct RunFlags {
  ModelFlags model;
  std::string problem;
  std::string schedule = "const:0.01";
  std::size_t steps = 10'000;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 100;
  std::string theta0;
  std::string out = ".";
  bool force = false;
  bool bounds = false;
  std::size_t kappa_restarts = 64;
  CLI::Option* problem_opt = nullptr;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  add_model_flags(sub, f.model);
  f.problem_opt = sub->add_option("--problem", f.problem, "Linear SA problem JSON file")->check(CLI::ExistingFile);
  f.problem_opt->excludes(f.model.baird_opt)->excludes(f.model.mdp_opt);
  sub->add_option("--schedule", f.schedule, "Step sizes, e.g. const:0.01 or poly:eps=2,h=10,xi=1")->capture_default_str();
  sub->add_option("--steps", f.steps, "Iterations per replication")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--reps", f.reps, "Replications")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--seed", f.seed, "Base seed; replication r uses seed + r")->capture_default_str();
  sub->add_option("--checkpoint-every", f.checkpoint_every, "Checkpoint spacing")->capture_default_str();
  sub->add_option("--theta0", f.theta0, "JSON array with the initial iterate (default all ones)")
      ->check(CLI::ExistingFile);
  sub->add_option("--kappa-restarts", f.kappa_restarts, "Restarts for the kappa estimate")->capture_default_str();
  sub->add_flag("--force", f.force, "Run even when the step-size condition fails");
}

struct Prepared {
  SaProblem problem;
  std::string source;
  std::optional<double> kappa;
};

Prepared prepare(const RunFlags& f) {
  if (!f.problem.empty()) {
    return {io::linear_problem_from_json(io::read_json(f.problem)), f.problem, std::nullopt};
  }
  if (!has_model(f.model)) throw InvalidInput("give --problem, --baird, or --mdp with --features");
  LoadedModel m = load_model(f.model);
  QProblem qp = QProblem::build(m.mdp, m.policy, m.features);
  const double kappa = kappa_estimate(m.features, m.mdp, m.policy, m.mdp.gamma(), f.kappa_restarts);
  qp.theta_star = solve_theta_star(qp);
  return {to_sa_problem(qp, kappa), m.source, kappa};
}

struct RunOutcome {
  int code = kOk;
  Prepared prepared;
  StepSchedule schedule;
  Condition1Verdict condition;
  MseCurve curve;
  std::vector<std::optional<double>> bound;  // per curve point
  Vector theta0;
};

RunOutcome execute(const RunFlags& f, bool with_bounds, std::ostream& err) {
  RunOutcome r{kOk, prepare(f), StepSchedule::parse(f.schedule), {}, {}, {}, {}};
  const SaProblem& problem = r.prepared.problem;
  if (!problem.theta_star()) throw InvalidInput("the problem has no known theta*");

  MixingProfile profile(problem.noise());
  const MixingTimeFn t_of = mixing_time_fn(profile, r.schedule, problem.lip());
  if (problem.drift()) {
    r.condition = verify_condition1(r.schedule, problem.lip(), *problem.drift(), t_of, f.steps);
  } else {
    r.condition.reason = "no certified negative drift for this problem";
  }
  if (!r.condition.feasible()) {
    err << "step-size condition not met: " << r.condition.reason << "\n";
    if (!f.force) {
      r.code = kConditionInfeasible;
      return r;
    }
    err << "continuing because of --force\n";
  }

  const auto d = static_cast<Eigen::Index>(problem.dim());
  r.theta0 = f.theta0.empty() ? Vector(Vector::Ones(d)) : io::vector_from_json(io::read_json(f.theta0), "theta0");
  if (r.theta0.size() != d) throw InvalidInput("theta0 must have " + std::to_string(d) + " entries");

  RunConfig config;
  config.theta0 = r.theta0;
  config.n_steps = f.steps;
  config.checkpoint_every = f.checkpoint_every;
  r.curve = estimate_mse(problem, r.schedule, config, f.reps, f.seed, threads_from_env());
  r.bound.assign(r.curve.points.size(), std::nullopt);

  if (with_bounds && r.condition.feasible()) {
    const BetaPair beta = beta_constants(r.theta0, *problem.theta_star(), problem.lip());
    BoundConstants c;
    c.beta1 = beta.beta1;
    c.beta2 = beta.beta2;
    c.alpha = *problem.drift();
    c.lip = problem.lip();
    c.k_start = *r.condition.k_start;
    std::vector<std::size_t> ks;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < r.curve.points.size(); ++i) {
      if (r.curve.points[i].k >= c.k_start) {
        ks.push_back(r.curve.points[i].k);
        index.push_back(i);
      }
    }
    const std::vector<double> values = theorem1_curve(c, r.schedule, t_of, ks);
    for (std::size_t j = 0; j < values.size(); ++j) r.bound[index[j]] = values[j];
  }
  return r;
}

std::string bound_csv(const RunOutcome& r, const std::string& value_name) {
  std::string text = "k," + value_name + ",stderr,theory_bound\n";
  for (std::size_t i = 0; i < r.curve.points.size(); ++i) {
    const MsePoint& p = r.curve.points[i];
    text += std::to_string(p.k) + "," + num(p.mean) + "," + num(p.std_error) + ",";
    if (r.bound[i]) text += num(*r.bound[i]);
    text += "\n";
  }
  return text;
}

int cmd_run(const RunFlags& f, std::ostream& out, std::ostream& err) {
  const RunOutcome r = execute(f, f.bounds, err);
  if (r.code != kOk) return r.code;
  const SaProblem& problem = r.prepared.problem;
  const fs::path dir(f.out);
  io::write_text(dir / "run_mse.csv", f.bounds ? bound_csv(r, "value") : io::curve_csv(r.curve));

  json condition = {{"feasible", r.condition.feasible()}, {"forced", !r.condition.feasible() && f.force}};
  condition["k_start"] = r.condition.k_start ? json(*r.condition.k_start) : json(nullptr);
  if (!r.condition.reason.empty()) condition["reason"] = r.condition.reason;
  json manifest = {{"command", "run"},
                   {"source", r.prepared.source},
                   {"schedule", r.schedule.to_string()},
                   {"n_steps", f.steps},
                   {"checkpoint_every", f.checkpoint_every},
                   {"seeds", {{"base_seed", f.seed}, {"reps", f.reps}, {"seed_rule", "replication r uses base_seed + r"}}},
                   {"lip", problem.lip()},
                   {"theta0", io::to_json(r.theta0)},
                   {"theta_star", io::to_json(*problem.theta_star())},
                   {"condition1", condition},
                   {"diverged", r.curve.diverged}};
  manifest["drift"] = problem.drift() ? json(*problem.drift()) : json(nullptr);
  if (r.prepared.kappa) manifest["kappa"] = *r.prepared.kappa;
  io::write_json(dir / "run_manifest.json", manifest);

  out << "K = " << (r.condition.k_start ? std::to_string(*r.condition.k_start) : std::string("none")) << "\n";
  if (!r.curve.points.empty()) {
    const MsePoint& last = r.curve.points.back();
    out << "final k = " << last.k << ", mse = " << num(last.mean) << " +- " << num(last.std_error) << "\n";
  }
  out << "wrote " << (dir / "run_mse.csv").string() << " and " << (dir / "run_manifest.json").string() << "\n";
  return kOk;
}

int cmd_bounds(const RunFlags& f, std::ostream& out, std::ostream& err) {
  const RunOutcome r = execute(f, true, err);
  if (r.code != kOk) return r.code;
  out << bound_csv(r, "empirical_mse");
  return kOk;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentFlags {
  std::string figure;
  std::string out = "results";
  std::size_t reps = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 1;
  double eps = 0.01;
  double eps_xi1 = 0.0;
  CLI::Option* reps_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* eps_xi1_opt = nullptr;
};

void list_written(const std::vector<fs::path>& files, std::ostream& out) {
  for (const auto& p : files) out << "wrote " << p.string() << "\n";
}

int cmd_experiment(const ExperimentFlags& f, std::ostream& out) {
  const std::size_t threads = threads_from_env();
  const fs::path dir(f.out);
  if (f.figure == "fig1") {
    Fig1Config c;
    c.threads = threads;
    if (f.reps_opt->count()) c.reps = f.reps;
    if (f.steps_opt->count()) c.n_steps = f.steps;
    if (f.seed_opt->count()) c.base_seed = f.seed;
    if (f.eps_opt->count()) c.eps = f.eps;
    const Fig1Result r = fig1_experiment(c);
    for (const auto& s : r.series) {
      out << "gamma " << num(s.gamma) << ": " << to_string(s.verdict) << " (" << s.diverged << "/" << c.reps
          << " diverged, mean final norm " << num(s.mean_final_norm) << ")\n";
    }
    list_written(write_fig1(r, dir), out);
    return kOk;
  }
  if (f.figure == "fig2") {
    Fig2Config c;
    c.threads = threads;
    if (f.reps_opt->count()) c.reps = f.reps;
    if (f.steps_opt->count()) c.n_steps = f.steps;
    if (f.seed_opt->count()) c.base_seed = f.seed;
    if (f.eps_opt->count()) c.eps = f.eps;
    const Fig2Result r = fig2_experiment(c);
    out << "slope " << num(r.fit.slope) << ", r2 " << num(r.fit.r2) << " over " << r.fit_points << " checkpoints\n";
    list_written(write_fig2(r, dir), out);
    return kOk;
  }
  Fig34Config c;
  c.threads = threads;
  if (f.reps_opt->count()) c.reps = f.reps;
  if (f.steps_opt->count()) c.n_steps = f.steps;
  if (f.seed_opt->count()) c.base_seed = f.seed;
  if (f.eps_xi1_opt->count()) c.eps_for_xi1 = f.eps_xi1;
  const Fig34Result r = fig34_experiment(c);
  out << "delta_pi " << num(r.delta_pi) << ", kappa " << num(r.kappa) << ", eps(xi=1) " << num(r.eps_for_xi1)
      << ", h " << num(r.h) << "\n";
  for (const auto& s : r.series) out << "xi " << num(s.xi) << ": slope " << num(s.slope) << "\n";
  list_written(f.figure == "fig3" ? write_fig3(r, dir) : write_fig4(r, dir), out);
  return kOk;
}

}  // namespace

std::size_t threads_from_env() {
  const char* raw = std::getenv("SA_LAB_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(raw, &end, 10);
  if (*end != '\0' || n == 0) throw InvalidInput("SA_LAB_THREADS must be a positive integer");
  return static_cast<std::size_t>(n);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic approximation under Markovian noise: mixing, bounds, and Q-learning stability"};
  app.require_subcommand(1);

  ChainFlags chain;
  CLI::App* chain_cmd = app.add_subcommand("chain", "Stationary distribution, mixing table and geometric fit");
  chain_cmd->add_option("--chain", chain.chain, "Chain JSON file")->required()->check(CLI::ExistingFile);
  chain_cmd->add_option("--k-max", chain.k_max, "Largest k in the d_max table")->capture_default_str();
  chain_cmd->add_option("--delta", chain.deltas, "Precisions for t_mix")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  chain_cmd->add_option("--lip", chain.lip, "Lipschitz constant used for L1")->check(CLI::PositiveNumber)->capture_default_str();
  chain_cmd->add_option("--out", chain.out, "Output directory")->capture_default_str();

  StabilityFlags stab;
  CLI::App* stab_cmd = app.add_subcommand("stability", "Behavior-policy stability certificate");
  add_model_flags(stab_cmd, stab.model);
  stab_cmd->add_option("--enumeration-cap", stab.enumeration_cap, "Largest |A|^|S| enumerated")->capture_default_str();
  stab_cmd->add_flag("--allow-sampling", stab.allow_sampling, "Sample policies above the cap");
  stab_cmd->add_option("--samples", stab.samples, "Sampled policies")->capture_default_str();
  stab_cmd->add_option("--kappa-restarts", stab.kappa_restarts, "Restarts for the kappa estimate")->capture_default_str();
  stab_cmd->add_option("--seed", stab.seed, "Seed for sampling and kappa restarts")->capture_default_str();
  stab_cmd->add_option("--out", stab.out, "Also write stability_report.json here");

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Replicated SA or Q-learning runs with an MSE curve");
  add_run_flags(run_cmd, run);
  run_cmd->add_flag("--bounds", run.bounds, "Add the finite-sample bound column");
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();

  RunFlags bnd;
  CLI::App* bnd_cmd = app.add_subcommand("bounds", "Print empirical MSE next to the finite-sample bound");
  add_run_flags(bnd_cmd, bnd);

  ExperimentFlags exp;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Reproduce one of the Baird figures");
  exp_cmd->add_option("figure", exp.figure, "fig1, fig2, fig3 or fig4")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4"}));
  exp_cmd->add_option("--out", exp.out, "Output directory")->capture_default_str();
  exp.reps_opt = exp_cmd->add_option("--reps", exp.reps, "Replications")->check(CLI::PositiveNumber);
  exp.steps_opt = exp_cmd->add_option("--steps", exp.steps, "Iterations per replication")->check(CLI::PositiveNumber);
  exp.seed_opt = exp_cmd->add_option("--seed", exp.seed, "Base seed");
  exp.eps_opt = exp_cmd->add_option("--eps", exp.eps, "Constant step size (fig1, fig2)")->check(CLI::Range(0.0, 1.0));
  exp.eps_xi1_opt =
      exp_cmd->add_option("--eps-xi1", exp.eps_xi1, "Coefficient for xi = 1 (fig3, fig4)")->check(CLI::PositiveNumber);

  std::vector<const char*> argv{"sa_lab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (chain_cmd->parsed()) return cmd_chain(chain, out);
    if (stab_cmd->parsed()) return cmd_stability(stab, out);
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (bnd_cmd->parsed()) return cmd_bounds(bnd, out, err);
    if (exp_cmd->parsed()) return cmd_experiment(exp, out);
  } catch (const EnumerationCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kEnumerationCap;
  } catch (const PremiseViolation& e) {
    err << "error: " << e.what() << " (" << num(e.lhs()) << " vs " << num(e.rhs()) << ")\n";
    return kConditionInfeasible;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kInputError;
}

}  // namespace salab::cli
