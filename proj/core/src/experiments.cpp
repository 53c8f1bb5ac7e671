#include "sa_lab/experiments.hpp"

#include "sa_lab/error.hpp"
#include "sa_lab/io.hpp"
#include "sa_lab/random.hpp"
#include "sa_lab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace salab {

// ---------------------------------------------------------------------------
// Baird

BairdModel build_baird(const BairdSpec& spec) {
  constexpr std::size_t upper = kBairdStates - 1;
  const auto n = static_cast<Eigen::Index>(kBairdStates);

  std::vector<Matrix> p(kBairdActions, Matrix::Zero(n, n));
  p[kSolid].col(static_cast<Eigen::Index>(upper)).setOnes();
  p[kDashed].leftCols(static_cast<Eigen::Index>(upper)).setConstant(1.0 / static_cast<double>(upper));

  Matrix reward = Matrix::Zero(n, static_cast<Eigen::Index>(kBairdActions));
  double r_max = 0.0;
  if (spec.reward == RewardMode::UniformRandom) {
    Rng rng(spec.reward_seed);
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index a = 0; a < reward.cols(); ++a) reward(s, a) = rng.uniform01();
    r_max = 1.0;
  }

  Matrix phi = Matrix::Zero(static_cast<Eigen::Index>(kBairdStates * kBairdActions), static_cast<Eigen::Index>(kBairdDim));
  auto row = [](std::size_t s, std::size_t a) { return static_cast<Eigen::Index>(s * kBairdActions + a); };
  for (std::size_t s = 0; s < upper; ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    phi(row(s, kSolid), 0) = 1.0;
    phi(row(s, kSolid), 1 + i) = 2.0;
    phi(row(s, kDashed), 7) = 1.0;
    phi(row(s, kDashed), 8 + i) = 2.0;
  }
  phi(row(upper, kSolid), 0) = 2.0;
  phi(row(upper, kSolid), 7) = 2.0;
  phi(row(upper, kDashed), 7) = 2.0;

  LinearFeatures features(std::move(phi), kBairdStates, kBairdActions);
  if (spec.normalize_features) features = features.normalized_copy();
  return BairdModel{Mdp(std::move(p), std::move(reward), spec.gamma, r_max), std::move(features),
                    Policy::uniform(kBairdStates, kBairdActions)};
}

// ---------------------------------------------------------------------------
// Fits

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("linear_fit: x and y differ in length");
  if (x.size() < 2) throw InvalidInput("linear_fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("linear_fit: all x values coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.n = x.size();
  return fit;
}

double loglog_slope(const std::vector<std::pair<double, double>>& series, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw InvalidInput("loglog_slope: tail_fraction must lie in (0,1]");
  const std::size_t n = series.size();
  const auto tail = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  if (tail > n) throw InvalidInput("loglog_slope: need at least two points in the tail");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = n - tail; i < n; ++i) {
    const auto [k, v] = series[i];
    if (!(k > 0.0)) throw InvalidInput("loglog_slope: k must be positive in the tail");
    if (!(v > 0.0)) throw InvalidInput("loglog_slope: nonpositive value in the tail");
    lx.push_back(std::log(k));
    ly.push_back(std::log(v));
  }
  return linear_fit(lx, ly).slope;
}

// ---------------------------------------------------------------------------
// Shared setup

namespace {

Vector baird_theta0() { return Vector::Ones(static_cast<Eigen::Index>(kBairdDim)); }

SaProblem zero_reward_problem(double gamma) {
  const BairdModel model = build_baird({RewardMode::Zero, 0, gamma, false});
  QProblem qp = QProblem::build(model.mdp, model.behavior, model.features);
  qp.theta_star = Vector::Zero(static_cast<Eigen::Index>(kBairdDim));
  return to_sa_problem(qp);
}

std::string setting(const char* name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%g", name, v);
  return buf;
}

std::string gnuplot_header(const std::string& output, const std::string& xlabel, const std::string& ylabel) {
  return "set datafile separator ','\n"
         "set terminal pngcairo size 900,600\n"
         "set output '" + output + "'\n"
         "set xlabel '" + xlabel + "'\n"
         "set ylabel '" + ylabel + "'\n"
         "set key top right\n";
}

io::json seed_info(std::uint64_t base_seed, std::size_t reps) {
  return {{"base_seed", base_seed}, {"reps", reps}, {"seed_rule", "replication r uses base_seed + r"}};
}

}  // namespace

// ---------------------------------------------------------------------------
// fig1

std::string to_string(Fig1Verdict v) {
  switch (v) {
    case Fig1Verdict::Converged:
      return "converged";
    case Fig1Verdict::Diverged:
      return "diverged";
    case Fig1Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Fig1Result fig1_experiment(const Fig1Config& config) {
  if (config.reps == 0) throw InvalidInput("fig1: reps must be positive");
  Fig1Result result;
  result.config = config;
  const Vector theta0 = baird_theta0();
  result.theta0_norm = theta0.norm();
  const StepSchedule schedule = StepSchedule::constant(config.eps);

  for (double gamma : config.gammas) {
    const SaProblem problem = zero_reward_problem(gamma);
    RunConfig rc;
    rc.theta0 = theta0;
    rc.n_steps = config.n_steps;
    rc.checkpoint_every = config.checkpoint_every;
    rc.divergence_threshold = config.divergence_factor * result.theta0_norm;
    const std::vector<RunResult> runs =
        run_replications(problem, schedule, rc, config.reps, config.base_seed, config.threads);

    Fig1Series series;
    series.gamma = gamma;
    std::size_t longest = 0;
    for (const auto& run : runs) longest = std::max(longest, run.checkpoints.size());
    for (std::size_t i = 0; i < longest; ++i) {
      NormPoint p;
      double sum = 0.0;
      double sum_sq = 0.0;
      for (const auto& run : runs) {
        if (i >= run.checkpoints.size()) continue;
        const double v = std::sqrt(run.checkpoints[i].value);
        p.k = run.checkpoints[i].k;
        sum += v;
        sum_sq += v * v;
        ++p.count;
      }
      p.mean = sum / static_cast<double>(p.count);
      if (p.count > 1) {
        const double var = std::max(0.0, (sum_sq - sum * p.mean) / static_cast<double>(p.count - 1));
        p.std_error = std::sqrt(var / static_cast<double>(p.count));
      }
      series.curve.push_back(p);
    }

    double final_sum = 0.0;
    std::size_t finished = 0;
    for (const auto& run : runs) {
      if (run.diverged) {
        ++series.diverged;
        series.diverged_at.push_back(*run.diverged_at);
      } else {
        final_sum += run.final_theta.norm();
        ++finished;
      }
    }
    series.mean_final_norm = finished ? final_sum / static_cast<double>(finished) : std::numeric_limits<double>::infinity();
    if (series.diverged * 10 >= config.reps * 9) {
      series.verdict = Fig1Verdict::Diverged;
    } else if (series.diverged == 0 && series.mean_final_norm < 0.1 * result.theta0_norm) {
      series.verdict = Fig1Verdict::Converged;
    }
    result.series.push_back(std::move(series));
  }
  return result;
}

// ---------------------------------------------------------------------------
// fig2

Fig2Result fig2_experiment(const Fig2Config& config) {
  Fig2Result result;
  result.config = config;
  const SaProblem problem = zero_reward_problem(config.gamma);
  RunConfig rc;
  rc.theta0 = baird_theta0();
  rc.n_steps = config.n_steps;
  rc.checkpoint_every = config.checkpoint_every;
  result.curve = estimate_mse(problem, StepSchedule::constant(config.eps), rc, config.reps, config.base_seed,
                              config.threads);

  std::vector<double> ks;
  std::vector<double> logs;
  for (const auto& p : result.curve.points) {
    if (!(p.mean > config.floor)) break;
    ks.push_back(static_cast<double>(p.k));
    logs.push_back(std::log(p.mean));
  }
  result.fit_points = ks.size();
  if (ks.size() >= 2) result.fit = linear_fit(ks, logs);
  return result;
}

// ---------------------------------------------------------------------------
// fig3 and fig4

Fig34Result fig34_experiment(const Fig34Config& config) {
  if (!(config.first_step > 0.0 && config.first_step <= 1.0)) throw InvalidInput("fig34: first step must lie in (0,1]");
  Fig34Result result;
  result.config = config;

  const BairdModel model = build_baird({RewardMode::UniformRandom, config.reward_seed, config.gamma, false});
  QProblem qp = QProblem::build(model.mdp, model.behavior, model.features);
  result.delta_pi = delta_pi(model.features, model.mdp, model.behavior).value;
  result.kappa = kappa_estimate(model.features, model.mdp, model.behavior, config.gamma, config.kappa_restarts);
  const std::string report = "delta_pi = " + io::format_double(result.delta_pi) +
                             ", gamma^2 = " + io::format_double(config.gamma * config.gamma) +
                             ", kappa = " + io::format_double(result.kappa);
  if (!(result.kappa > 0.0)) throw PreconditionError("fig34: behavior policy is not certified (" + report + ")");

  try {
    result.theta_star = solve_theta_star(qp);
  } catch (const NoConvergence& e) {
    throw NoConvergence(std::string(e.what()) + " (" + report + ")", e.step());
  }
  result.theta_star_residual = q_mean_update(qp, result.theta_star).norm();
  qp.theta_star = result.theta_star;

  double eps1 = config.eps_for_xi1.value_or(2.0 / result.kappa);
  if (!config.eps_for_xi1) {
    while (result.kappa * eps1 < 2.0) eps1 = std::nextafter(eps1, std::numeric_limits<double>::infinity());
  } else if (result.kappa * eps1 < 2.0) {
    throw PremiseViolation("fig34: the xi = 1 coefficient needs kappa * eps >= 2", result.kappa * eps1, 2.0);
  }
  result.eps_for_xi1 = eps1;
  result.h = eps1 / config.first_step;

  const SaProblem problem = to_sa_problem(qp, result.kappa);
  RunConfig rc;
  rc.theta0 = baird_theta0();
  rc.n_steps = config.n_steps;
  rc.checkpoint_every = config.checkpoint_every;
  for (double xi : config.xis) {
    Fig34Series series;
    series.xi = xi;
    series.schedule = StepSchedule::polynomial(config.first_step * std::pow(result.h, xi), result.h, xi);
    series.curve = estimate_mse(problem, series.schedule, rc, config.reps, config.base_seed, config.threads);
    std::vector<std::pair<double, double>> tail;
    for (const auto& p : series.curve.points) {
      if (p.k > 0) tail.emplace_back(static_cast<double>(p.k), p.mean);
    }
    series.slope = loglog_slope(tail, config.tail_fraction);
    result.series.push_back(std::move(series));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Writers

std::vector<std::filesystem::path> write_fig1(const Fig1Result& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  std::string plot = gnuplot_header("fig1.png", "k", "mean ||theta_k||") + "set logscale y\nplot ";
  io::json series = io::json::array();
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const Fig1Series& s = r.series[i];
    const std::string name = "fig1_" + setting("gamma", s.gamma) + ".csv";
    std::vector<std::vector<double>> rows;
    for (const auto& p : s.curve) rows.push_back({static_cast<double>(p.k), p.mean, p.std_error});
    io::write_text(dir / name, io::csv({"k", "value", "stderr"}, rows));
    written.push_back(dir / name);
    plot += std::string(i ? ", " : "") + "'" + name + "' using 1:2 every ::1 with lines title '" +
            setting("gamma=", s.gamma) + "'";
    series.push_back({{"gamma", s.gamma},
                      {"file", name},
                      {"diverged", s.diverged},
                      {"diverged_at", s.diverged_at},
                      {"mean_final_norm", s.mean_final_norm},
                      {"verdict", to_string(s.verdict)}});
  }
  io::write_text(dir / "fig1.gp", plot + "\n");
  written.push_back(dir / "fig1.gp");
  io::json manifest = {{"figure", "fig1"},
                       {"schedule", StepSchedule::constant(r.config.eps).to_string()},
                       {"n_steps", r.config.n_steps},
                       {"checkpoint_every", r.config.checkpoint_every},
                       {"theta0", "ones(14)"},
                       {"divergence_threshold", r.config.divergence_factor * r.theta0_norm},
                       {"reward", "zero"},
                       {"seeds", seed_info(r.config.base_seed, r.config.reps)},
                       {"series", series}};
  io::write_json(dir / "fig1_manifest.json", manifest);
  written.push_back(dir / "fig1_manifest.json");
  return written;
}

std::vector<std::filesystem::path> write_fig2(const Fig2Result& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  const std::string name = "fig2_" + setting("gamma", r.config.gamma) + ".csv";
  std::vector<std::vector<double>> rows;
  for (const auto& p : r.curve.points) {
    if (!(p.mean > 0.0)) continue;
    rows.push_back({static_cast<double>(p.k), std::log(p.mean), p.std_error / p.mean});
  }
  io::write_text(dir / name, io::csv({"k", "value", "stderr"}, rows));
  written.push_back(dir / name);
  const std::string plot = gnuplot_header("fig2.png", "k", "ln E||theta_k||^2") + "plot '" + name +
                           "' using 1:2 every ::1 with lines title '" + setting("gamma=", r.config.gamma) + "'\n";
  io::write_text(dir / "fig2.gp", plot);
  written.push_back(dir / "fig2.gp");
  io::json manifest = {{"figure", "fig2"},
                       {"gamma", r.config.gamma},
                       {"schedule", StepSchedule::constant(r.config.eps).to_string()},
                       {"n_steps", r.config.n_steps},
                       {"checkpoint_every", r.config.checkpoint_every},
                       {"theta0", "ones(14)"},
                       {"reward", "zero"},
                       {"seeds", seed_info(r.config.base_seed, r.config.reps)},
                       {"diverged", r.curve.diverged},
                       {"fit", {{"slope", r.fit.slope}, {"intercept", r.fit.intercept}, {"r2", r.fit.r2}, {"points", r.fit_points}}}};
  io::write_json(dir / "fig2_manifest.json", manifest);
  written.push_back(dir / "fig2_manifest.json");
  return written;
}

namespace {

io::json fig34_manifest(const Fig34Result& r, const std::string& figure) {
  io::json series = io::json::array();
  for (const auto& s : r.series) {
    series.push_back({{"xi", s.xi}, {"schedule", s.schedule.to_string()}, {"slope", s.slope}, {"diverged", s.curve.diverged}});
  }
  return {{"figure", figure},
          {"gamma", r.config.gamma},
          {"reward", "uniform(0,1)"},
          {"reward_seed", r.config.reward_seed},
          {"n_steps", r.config.n_steps},
          {"checkpoint_every", r.config.checkpoint_every},
          {"tail_fraction", r.config.tail_fraction},
          {"theta0", "ones(14)"},
          {"theta_star", io::to_json(r.theta_star)},
          {"theta_star_residual", r.theta_star_residual},
          {"delta_pi", r.delta_pi},
          {"kappa", r.kappa},
          {"eps_for_xi1", r.eps_for_xi1},
          {"h", r.h},
          {"first_step", r.config.first_step},
          {"seeds", seed_info(r.config.base_seed, r.config.reps)},
          {"series", series}};
}

}  // namespace

std::vector<std::filesystem::path> write_fig3(const Fig34Result& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  std::string plot = gnuplot_header("fig3.png", "k", "E||theta_k - theta*||^2") + "set logscale y\nplot ";
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const Fig34Series& s = r.series[i];
    const std::string name = "fig3_" + setting("xi", s.xi) + ".csv";
    io::write_text(dir / name, io::curve_csv(s.curve));
    written.push_back(dir / name);
    plot += std::string(i ? ", " : "") + "'" + name + "' using 1:2 every ::1 with lines title '" + setting("xi=", s.xi) + "'";
  }
  io::write_text(dir / "fig3.gp", plot + "\n");
  written.push_back(dir / "fig3.gp");
  io::write_json(dir / "fig3_manifest.json", fig34_manifest(r, "fig3"));
  written.push_back(dir / "fig3_manifest.json");
  return written;
}

std::vector<std::filesystem::path> write_fig4(const Fig34Result& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  std::string plot = gnuplot_header("fig4.png", "ln k", "ln E||theta_k - theta*||^2") + "plot ";
  std::vector<std::vector<double>> slopes;
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const Fig34Series& s = r.series[i];
    const std::string name = "fig4_" + setting("xi", s.xi) + ".csv";
    std::vector<std::vector<double>> rows;
    for (const auto& p : s.curve.points) {
      if (p.k == 0 || !(p.mean > 0.0)) continue;
      rows.push_back({static_cast<double>(p.k), std::log(p.mean), p.std_error / p.mean});
    }
    io::write_text(dir / name, io::csv({"k", "value", "stderr"}, rows));
    written.push_back(dir / name);
    plot += std::string(i ? ", " : "") + "'" + name + "' using (log($1)):2 every ::1 with lines title '" +
            setting("xi=", s.xi) + "'";
    slopes.push_back({s.xi, s.slope});
  }
  io::write_text(dir / "fig4.gp", plot + "\n");
  written.push_back(dir / "fig4.gp");
  io::write_text(dir / "fig4_slopes.csv", io::csv({"xi", "slope"}, slopes));
  written.push_back(dir / "fig4_slopes.csv");
  io::write_json(dir / "fig4_manifest.json", fig34_manifest(r, "fig4"));
  written.push_back(dir / "fig4_manifest.json");
  return written;
}

}  // namespace salab
