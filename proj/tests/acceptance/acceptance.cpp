// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include "cli.hpp"
#include "oracles.hpp"
#include "sa_lab/bounds.hpp"
#include "sa_lab/experiments.hpp"
#include "sa_lab/io.hpp"
#include "sa_lab/linalg.hpp"
#include "sa_lab/markov.hpp"
#include "sa_lab/rl.hpp"
#include "sa_lab/sa.hpp"
#include "sa_lab/stability.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using salab::Matrix;
using salab::Vector;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return salab::io::format_double(v); }

// ---------------------------------------------------------------------------

Outcome baird_certificate() {
  Outcome o;
  const auto start = Clock::now();
  std::ostringstream out;
  std::ostringstream err;
  const int code = salab::cli::run_cli({"stability", "--baird"}, out, err);
  const double secs = seconds_since(start);
  o.require(code == 0, "stability exited " + std::to_string(code) + ": " + err.str());
  if (!o.pass) return o;
  const auto report = salab::io::json::parse(out.str());
  const double delta = report.at("delta_pi").get<double>();
  const double threshold = report.at("gamma_threshold").get<double>();
  o.require(delta >= 0.45 && delta <= 0.55, "delta_pi " + fmt(delta) + " outside [0.45, 0.55]");
  o.require(threshold >= 0.67 && threshold <= 0.74, "threshold " + fmt(threshold) + " outside [0.67, 0.74]");
  o.require(secs < 5.0, "took " + fmt(secs) + " s");
  o.detail = o.pass ? "delta_pi " + fmt(delta) + ", threshold " + fmt(threshold) + ", " + fmt(secs) + " s" : o.detail;
  return o;
}

Outcome figure1() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = salab::fig1_experiment({});
  const double secs = seconds_since(start);
  std::string summary;
  for (const auto& s : r.series) {
    summary += "gamma " + fmt(s.gamma) + ": " + std::to_string(s.diverged) + "/20 diverged, final " +
               fmt(s.mean_final_norm) + "; ";
    if (s.gamma < 0.95) {
      o.require(s.diverged == 0 && s.mean_final_norm < 0.1 * r.theta0_norm,
                "gamma " + fmt(s.gamma) + " did not converge (final " + fmt(s.mean_final_norm) + ")");
    } else {
      o.require(s.diverged >= 18, "gamma " + fmt(s.gamma) + " diverged in only " + std::to_string(s.diverged) + "/20");
    }
  }
  o.require(secs < 60.0, "took " + fmt(secs) + " s");
  if (o.pass) o.detail = summary + fmt(secs) + " s";
  return o;
}

Outcome figure2() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = salab::fig2_experiment({});
  const double secs = seconds_since(start);
  o.require(r.fit_points >= 2, "fewer than two points above the floor");
  o.require(r.fit.slope < 0.0, "slope " + fmt(r.fit.slope) + " is not negative");
  o.require(r.fit.r2 >= 0.95, "R^2 " + fmt(r.fit.r2) + " below 0.95");
  o.require(secs < 120.0, "took " + fmt(secs) + " s");
  if (o.pass) {
    o.detail = "slope " + fmt(r.fit.slope) + ", R^2 " + fmt(r.fit.r2) + " over " + std::to_string(r.fit_points) +
               " checkpoints, " + fmt(secs) + " s";
  }
  return o;
}

Outcome figure4() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = salab::fig34_experiment({});
  const double secs = seconds_since(start);
  std::string summary;
  for (const auto& s : r.series) {
    summary += "xi " + fmt(s.xi) + " slope " + fmt(s.slope) + "; ";
    if (s.xi < 1.0) {
      o.require(std::abs(s.slope + s.xi) <= 0.15, "xi " + fmt(s.xi) + " slope " + fmt(s.slope));
    } else {
      o.require(r.kappa * r.eps_for_xi1 >= 2.0, "kappa * eps below 2 for xi = 1");
      o.require(s.slope <= -0.8, "xi 1 slope " + fmt(s.slope) + " above -0.8");
    }
  }
  o.require(secs < 600.0, "took " + fmt(secs) + " s");
  if (o.pass) o.detail = summary + fmt(secs) + " s";
  return o;
}

// The two-state problem shipped in data/linear_problem.json.
salab::SaProblem two_state_problem() {
  Matrix p(2, 2);
  p << 0.6, 0.4, 0.4, 0.6;
  Matrix a0(2, 2);
  Matrix a1(2, 2);
  a0 << -1.0, 0.2, 0.0, -0.8;
  a1 << -0.6, 0.0, 0.3, -1.2;
  Vector b0(2);
  Vector b1(2);
  b0 << 0.3, -0.2;
  b1 << -0.3, 0.2;
  Vector ts(2);
  ts << 0.5, -0.5;
  return salab::make_linear_problem(salab::FiniteMarkovChain(p), {a0, a1}, {b0, b1}, ts);
}

Outcome theorem1_domination() {
  Outcome o;
  const auto start = Clock::now();
  const salab::SaProblem problem = two_state_problem();
  const double lip = problem.lip();
  const double alpha = *problem.drift();
  const std::size_t t_of_eps_guess = 5;
  const double eps = 0.0005;
  const std::size_t t_eps = salab::oracle::mixing_time(problem.noise().transition(), eps / (2.0 * lip));
  o.require(t_eps == t_of_eps_guess, "unexpected t_eps " + std::to_string(t_eps));
  o.require(eps * static_cast<double>(t_eps) <= alpha / (114.0 * lip * lip), "premise of the constant-step bound fails");
  if (!o.pass) return o;

  const salab::StepSchedule schedule = salab::StepSchedule::constant(eps);
  salab::MixingProfile profile(problem.noise());
  const auto t_of = salab::mixing_time_fn(profile, schedule, lip);
  const auto verdict = salab::verify_condition1(schedule, lip, alpha, t_of, 40'000);
  o.require(verdict.feasible() && *verdict.k_start == t_eps, "condition check did not give K = t_eps");
  if (!o.pass) return o;
  const std::size_t k_start = *verdict.k_start;

  salab::RunConfig config;
  config.theta0 = Vector::Ones(2);
  config.n_steps = 40'000;
  config.checkpoint_every = 250;
  config.checkpoints = {k_start, k_start + 1, 10, 50};
  const auto curve = salab::estimate_mse(problem, schedule, config, 200, 1);
  o.require(curve.diverged == 0, "replications diverged");

  const auto beta = salab::beta_constants(config.theta0, *problem.theta_star(), lip);
  salab::BoundConstants c;
  c.beta1 = beta.beta1;
  c.beta2 = beta.beta2;
  c.alpha = alpha;
  c.lip = lip;
  c.k_start = k_start;
  std::vector<std::size_t> ks;
  std::vector<double> mse;
  for (const auto& p : curve.points) {
    if (p.k >= k_start) {
      ks.push_back(p.k);
      mse.push_back(p.mean);
    }
  }
  const auto bound = salab::theorem1_curve(c, schedule, t_of, ks);
  double tightest = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double cor = salab::corollary1_bound(c, eps, t_eps, ks[i]);
    o.require(mse[i] <= bound[i], "k " + std::to_string(ks[i]) + ": mse " + fmt(mse[i]) + " > bound " + fmt(bound[i]));
    o.require(mse[i] <= cor, "k " + std::to_string(ks[i]) + ": mse " + fmt(mse[i]) + " > corollary " + fmt(cor));
    tightest = std::max(tightest, mse[i] / bound[i]);
  }
  const double secs = seconds_since(start);
  o.require(secs < 60.0, "took " + fmt(secs) + " s");
  if (o.pass) {
    o.detail = std::to_string(ks.size()) + " checkpoints from K = " + std::to_string(k_start) +
               ", largest mse/bound " + fmt(tightest) + ", " + fmt(secs) + " s";
  }
  return o;
}

// F(x, θ) = A_x θ + b_x + c_x sin(θ) (elementwise), L = max(‖A_x‖ + |c_x|, ‖b_x‖).
struct NonlinearProblem {
  salab::SaProblem problem;
  std::vector<Matrix> a;
  std::vector<Vector> b;
  std::vector<double> c;
};

NonlinearProblem random_nonlinear(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  const Matrix p = salab::oracle::random_stochastic(n, n, gen, 0.02);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Matrix> a;
  std::vector<Vector> b;
  std::vector<double> c;
  double lip = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    a.push_back(salab::oracle::random_matrix(d, d, gen));
    b.push_back(salab::oracle::random_matrix(d, 1, gen, -2.0, 2.0).col(0));
    c.push_back(u(gen));
    lip = std::max(lip, Eigen::JacobiSVD<Matrix>(a.back()).singularValues()(0) + std::abs(c.back()));
    lip = std::max(lip, b.back().norm());
  }
  salab::UpdateMap f = [a, b, c](std::size_t x, const Vector& theta, Vector& out) {
    out.noalias() = a[x] * theta;
    out += b[x] + c[x] * theta.array().sin().matrix();
  };
  return {salab::SaProblem(salab::FiniteMarkovChain(p), d, f, lip, std::nullopt), a, b, c};
}

Outcome mixing_bias() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::size_t checks = 0;
  double worst = -1.0;
  for (int chain = 0; chain < 10; ++chain) {
    const NonlinearProblem np = random_nonlinear(gen, 3, 2);
    const Matrix& p = np.problem.noise().transition();
    const Vector mu = salab::oracle::stationary_dense(p);
    auto f_at = [&](std::size_t y, const Vector& th) { return np.problem.update(y, th); };
    for (double delta : {0.1, 0.01, 0.001}) {
      const std::size_t t = salab::oracle::mixing_time(p, delta / (2.0 * np.problem.lip()));
      for (int trial = 0; trial < 10; ++trial) {
        Vector th(2);
        th << normal(gen), normal(gen);
        Vector mean = Vector::Zero(2);
        for (std::size_t y = 0; y < 3; ++y) mean += mu(static_cast<Eigen::Index>(y)) * f_at(y, th);
        Matrix power = Matrix::Identity(3, 3);
        for (std::size_t k = 0; k < t; ++k) power = power * p;
        for (std::size_t k = t; k <= t + 60; ++k) {
          for (std::size_t x = 0; x < 3; ++x) {
            Vector conditional = Vector::Zero(2);
            for (std::size_t y = 0; y < 3; ++y)
              conditional += power(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) * f_at(y, th);
            const double bias = (conditional - mean).norm();
            const double lib = salab::bias_norm(np.problem, th, x, k);
            const double limit = delta * (th.norm() + 1.0);
            o.require(bias <= limit + 1e-10, "bias " + fmt(bias) + " > " + fmt(limit) + " at k " + std::to_string(k));
            o.require(lib <= limit + 1e-10, "bias_norm " + fmt(lib) + " > " + fmt(limit) + " at k " + std::to_string(k));
            o.require(std::abs(lib - bias) <= 1e-9 * (1.0 + bias), "bias_norm disagrees with the dense evaluation");
            worst = std::max(worst, bias / limit);
            ++checks;
          }
          power = power * p;
        }
      }
    }
  }
  const double secs = seconds_since(start);
  o.require(secs < 30.0, "took " + fmt(secs) + " s");
  if (o.pass) o.detail = std::to_string(checks) + " checks, largest bias/limit " + fmt(worst) + ", " + fmt(secs) + " s";
  return o;
}

Outcome trajectory_drift() {
  Outcome o;
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t windows = 0;
  double worst = 0.0;
  for (int run = 0; run < 100; ++run) {
    std::optional<salab::SaProblem> problem;
    if (run % 2 == 0) {
      const std::size_t n = 2 + static_cast<std::size_t>(run % 3);
      const std::size_t d = 1 + static_cast<std::size_t>((run / 2) % 3);
      std::vector<Matrix> a;
      std::vector<Vector> b;
      for (std::size_t x = 0; x < n; ++x) {
        a.push_back(salab::oracle::random_matrix(d, d, gen, -2.0, 1.0));
        b.push_back(salab::oracle::random_matrix(d, 1, gen).col(0));
      }
      const Vector ts = salab::oracle::random_matrix(d, 1, gen, -3.0, 3.0).col(0);
      problem = salab::make_linear_problem(salab::FiniteMarkovChain(salab::oracle::random_stochastic(n, n, gen)), a, b, ts);
    } else {
      const double gamma = 0.5 + 0.45 * u(gen);
      const auto m = salab::build_baird({salab::RewardMode::UniformRandom, static_cast<std::uint64_t>(run), gamma, true});
      problem = salab::to_sa_problem(salab::QProblem::build(m.mdp, m.behavior, m.features));
    }
    const double lip = problem->lip();
    const salab::StepSchedule schedule =
        run % 4 < 2 ? salab::StepSchedule::constant((0.002 + 0.02 * u(gen)) / lip)
                    : salab::StepSchedule::polynomial(0.5 / lip * std::pow(5.0, 0.5 + 0.5 * u(gen)), 5.0,
                                                      0.5 + 0.5 * u(gen));

    salab::RunConfig config;
    config.theta0 = Vector::Constant(static_cast<Eigen::Index>(problem->dim()), 4.0 * u(gen) - 2.0);
    config.n_steps = 400;
    config.seed = static_cast<std::uint64_t>(run);
    std::vector<Vector> theta;
    salab::run_sa_observed(*problem, schedule, config,
                           [&](std::size_t, std::size_t, const Vector& th) { theta.push_back(th); });

    std::vector<double> prefix{0.0};
    for (std::size_t k = 0; k + 1 < theta.size(); ++k)
      prefix.push_back(prefix.back() + schedule.eps(static_cast<std::int64_t>(k)));
    const double limit = 1.0 / (4.0 * lip);
    for (std::size_t k1 = 0; k1 < theta.size(); ++k1) {
      for (std::size_t k2 = k1 + 1; k2 < theta.size(); ++k2) {
        const double s = prefix[k2] - prefix[k1];
        if (s > limit) break;
        const double move = (theta[k2] - theta[k1]).norm();
        const double first = 2.0 * lip * s * (theta[k1].norm() + 1.0);
        const double second = 4.0 * lip * s * (theta[k2].norm() + 1.0);
        o.require(move <= first + 1e-9, "run " + std::to_string(run) + ": first inequality fails at (" +
                                            std::to_string(k1) + ", " + std::to_string(k2) + ")");
        o.require(move <= second + 1e-9, "run " + std::to_string(run) + ": second inequality fails at (" +
                                             std::to_string(k1) + ", " + std::to_string(k2) + ")");
        worst = std::max(worst, move / std::min(first, second));
        ++windows;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(windows) + " windows, largest ratio " + fmt(worst);
  return o;
}

Outcome sign_equivalence() {
  Outcome o;
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int> ns(1, 4);
  std::uniform_int_distribution<int> na(1, 3);
  std::uniform_real_distribution<double> ug(0.2, 0.99);
  int compared = 0;
  int positive = 0;
  for (int model = 0; model < 50; ++model) {
    const auto n_s = static_cast<std::size_t>(ns(gen));
    const auto n_a = static_cast<std::size_t>(na(gen));
    const std::size_t d = std::min<std::size_t>(static_cast<std::size_t>(1 + gen() % 4), n_s * n_a);
    std::vector<Matrix> p;
    for (std::size_t a = 0; a < n_a; ++a) p.push_back(salab::oracle::random_stochastic(n_s, n_s, gen, 0.02));
    const double gamma = ug(gen);
    const salab::Mdp mdp(p, salab::oracle::random_matrix(n_s, n_a, gen, 0.0, 1.0), gamma);
    const salab::LinearFeatures f =
        salab::LinearFeatures(salab::oracle::random_matrix(n_s * n_a, d, gen), n_s, n_a).normalized_copy();
    const salab::Policy pi(salab::oracle::random_stochastic(n_s, n_a, gen, 0.05));
    const double kappa = salab::kappa_estimate(f, mdp, pi, gamma);
    const double delta = salab::delta_pi(f, mdp, pi).value;
    if (std::abs(kappa) <= 1e-4) continue;
    ++compared;
    positive += kappa > 0.0;
    o.require((kappa > 0.0) == (delta > gamma * gamma),
              "model " + std::to_string(model) + ": kappa " + fmt(kappa) + ", delta " + fmt(delta) + ", gamma^2 " +
                  fmt(gamma * gamma));
  }
  o.require(compared > 0, "no model had |kappa| above 1e-4");
  if (o.pass) {
    o.detail = std::to_string(compared) + " models compared (" + std::to_string(positive) + " with kappa > 0)";
  }
  return o;
}

Outcome oracle_equivalences() {
  Outcome o;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(gen);
    const double b = u(gen);
    const double d = u(gen);
    Matrix m(2, 2);
    m << a, b, b, d;
    const double got = salab::lambda_max(salab::SymMatrix(m));
    o.require(std::abs(got - salab::oracle::eig2x2(a, b, b, d).first) <= 1e-8, "lambda_max off on a 2x2");
  }
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 7);
    const Matrix p = salab::oracle::random_stochastic(n, n, gen, 0.01);
    const Vector mu = salab::stationary_distribution(salab::FiniteMarkovChain(p)).probabilities();
    o.require((mu - salab::oracle::stationary_dense(p)).cwiseAbs().maxCoeff() <= 1e-9, "stationary distribution off");
  }
  for (int i = 0; i < 40; ++i) {
    const std::size_t n_s = 2 + static_cast<std::size_t>(i % 3);
    const std::size_t d = 1 + static_cast<std::size_t>(i % 2);
    std::vector<Matrix> p{salab::oracle::random_stochastic(n_s, n_s, gen), salab::oracle::random_stochastic(n_s, n_s, gen)};
    const salab::Mdp mdp(p, Matrix::Zero(static_cast<Eigen::Index>(n_s), 2), 0.5);
    const salab::LinearFeatures f(salab::oracle::random_matrix(2 * n_s, d, gen), n_s, 2);
    const salab::Policy pi(salab::oracle::random_stochastic(n_s, 2, gen, 0.1));
    const Vector mu = salab::oracle::stationary_dense(salab::state_chain(mdp, pi).transition());
    const Matrix sigma_pi = salab::oracle::weighted_gram(f.phi(), mu, pi.probs(), 2);
    std::vector<Matrix> sigma_b;
    for (const Matrix& w : salab::oracle::deterministic_tables(n_s, 2))
      sigma_b.push_back(salab::oracle::weighted_gram(f.phi(), mu, w, 2));
    const double grid = salab::oracle::delta_grid(sigma_pi, sigma_b);
    const double got = salab::delta_pi(f, mdp, pi).value;
    o.require(std::abs(got - grid) <= 1e-3 * std::max(1.0, grid), "delta_pi " + fmt(got) + " vs grid " + fmt(grid));
  }
  for (int i = 0; i < 10; ++i) {
    const std::size_t n_s = 2 + static_cast<std::size_t>(i % 3);
    std::vector<Matrix> p{salab::oracle::random_stochastic(n_s, n_s, gen), salab::oracle::random_stochastic(n_s, n_s, gen)};
    const Matrix r = salab::oracle::random_matrix(n_s, 2, gen, 0.0, 1.0);
    const double gamma = 0.3;
    const salab::Mdp mdp(p, r, gamma);
    const auto dim = static_cast<Eigen::Index>(2 * n_s);
    const salab::QProblem qp = salab::QProblem::build(mdp, salab::Policy::uniform(n_s, 2),
                                                      salab::LinearFeatures(Matrix::Identity(dim, dim), n_s, 2));
    const Vector th = salab::solve_theta_star(qp);
    const Matrix q = salab::oracle::value_iteration(p, r, gamma);
    for (std::size_t s = 0; s < n_s; ++s)
      for (std::size_t a = 0; a < 2; ++a)
        o.require(std::abs(th(static_cast<Eigen::Index>(2 * s + a)) -
                           q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a))) <= 1e-6,
                  "tabular theta* differs from value iteration");
  }
  if (o.pass) o.detail = "lambda_max, stationary distribution, delta_pi grid and tabular theta* agree";
  return o;
}

Outcome condition1_constant() {
  Outcome o;
  std::mt19937_64 gen(99);
  int cases = 0;
  while (cases < 20) {
    const std::size_t n = 2 + static_cast<std::size_t>(cases % 3);
    const std::size_t d = 1 + static_cast<std::size_t>(cases % 2);
    std::vector<Matrix> a;
    std::vector<Vector> b;
    for (std::size_t x = 0; x < n; ++x) {
      a.push_back(salab::oracle::random_matrix(d, d, gen, -0.5, 0.5) -
                  Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
      b.push_back(salab::oracle::random_matrix(d, 1, gen).col(0));
    }
    const salab::SaProblem problem = salab::make_linear_problem(
        salab::FiniteMarkovChain(salab::oracle::random_stochastic(n, n, gen)), a, b, Vector::Zero(static_cast<Eigen::Index>(d)));
    if (!problem.drift()) continue;
    const double lip = problem.lip();
    const double alpha = *problem.drift();
    const double limit = alpha / (114.0 * lip * lip);
    // Largest step on a geometric grid that meets ε t_ε ≤ limit.
    double eps = limit;
    std::size_t t_eps = 0;
    for (;;) {
      t_eps = salab::oracle::mixing_time(problem.noise().transition(), eps / (2.0 * lip));
      if (eps * static_cast<double>(t_eps) <= limit) break;
      eps *= 0.9;
    }
    const salab::StepSchedule schedule = salab::StepSchedule::constant(eps);
    salab::MixingProfile profile(problem.noise());
    const auto verdict = salab::verify_condition1(schedule, lip, alpha, salab::mixing_time_fn(profile, schedule, lip));
    o.require(verdict.feasible(), "case " + std::to_string(cases) + ": reported infeasible: " + verdict.reason);
    if (verdict.feasible()) {
      o.require(*verdict.k_start == t_eps, "case " + std::to_string(cases) + ": K = " +
                                               std::to_string(*verdict.k_start) + ", t_eps = " + std::to_string(t_eps));
    }
    ++cases;
  }
  if (o.pass) o.detail = std::to_string(cases) + " constant-step cases with K = t_eps";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "Baird delta certificate", baird_certificate},
      {2, "fig1 convergence and divergence", figure1},
      {3, "fig2 exponential rate", figure2},
      {4, "fig4 slopes", figure4},
      {5, "theorem1_bound and corollary1_bound domination", theorem1_domination},
      {6, "mixing bias invariant", mixing_bias},
      {7, "trajectory drift invariant", trajectory_drift},
      {8, "stability sign equivalence", sign_equivalence},
      {9, "oracle equivalences", oracle_equivalences},
      {10, "constant-step condition start K = t_eps", condition1_constant},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << ": " << c.name << " (" << o.detail << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
