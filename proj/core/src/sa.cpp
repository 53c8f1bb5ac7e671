#include "sa_lab/sa.hpp"

#include "sa_lab/error.hpp"
#include "sa_lab/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace salab {

// ---------------------------------------------------------------------------
// SaProblem

SaProblem::SaProblem(FiniteMarkovChain noise, std::size_t dim, UpdateMap update, double lip,
                     std::optional<double> drift, std::optional<Vector> theta_star)
    : noise_(std::move(noise)),
      mu_(stationary_distribution(noise_)),
      dim_(dim),
      update_(std::move(update)),
      lip_(lip),
      drift_(drift),
      theta_star_(std::move(theta_star)) {
  if (dim_ == 0) throw InvalidInput("SaProblem: dimension must be positive");
  if (!update_) throw InvalidInput("SaProblem: update map is empty");
  if (!(lip_ > 0.0) || !std::isfinite(lip_)) throw InvalidInput("SaProblem: L must be positive");
  if (drift_ && !(*drift_ > 0.0)) throw InvalidInput("SaProblem: drift must be positive when given");
  if (theta_star_ && static_cast<std::size_t>(theta_star_->size()) != dim_) {
    throw InvalidInput("SaProblem: theta_star has the wrong dimension");
  }
}

Vector SaProblem::update(std::size_t x, const Vector& theta) const {
  Vector out(static_cast<Eigen::Index>(dim_));
  update_(x, theta, out);
  return out;
}

SaProblem SaProblem::with_theta_star(Vector theta_star) const {
  SaProblem copy = *this;
  if (static_cast<std::size_t>(theta_star.size()) != dim_) {
    throw InvalidInput("SaProblem: theta_star has the wrong dimension");
  }
  copy.theta_star_ = std::move(theta_star);
  return copy;
}

SaProblem make_linear_problem(const FiniteMarkovChain& noise, std::vector<Matrix> a, std::vector<Vector> b,
                              Vector theta_star) {
  const std::size_t n = noise.size();
  const auto d = theta_star.size();
  if (a.size() != n || b.size() != n) throw InvalidInput("make_linear_problem: need one (A, b) per state");
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x].rows() != d || a[x].cols() != d || b[x].size() != d) {
      throw InvalidInput("make_linear_problem: dimension mismatch at state " + std::to_string(x));
    }
  }
  const Distribution mu = stationary_distribution(noise);
  Vector b_bar = Vector::Zero(d);
  Matrix a_bar = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < n; ++x) {
    b_bar += mu[x] * b[x];
    a_bar += mu[x] * a[x];
  }
  for (auto& bx : b) bx -= b_bar;

  double lip = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    Eigen::JacobiSVD<Matrix> svd(a[x]);
    lip = std::max(lip, svd.singularValues()(0));
    lip = std::max(lip, (b[x] - a[x] * theta_star).norm());
  }
  const Matrix sym = 0.5 * (a_bar + a_bar.transpose());
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().maxCoeff();
  std::optional<double> drift;
  if (top < 0.0) drift = -top;

  UpdateMap f = [a = std::move(a), b = std::move(b), ts = theta_star](std::size_t x, const Vector& theta,
                                                                       Vector& out) {
    out.noalias() = a[x] * (theta - ts);
    out += b[x];
  };
  return SaProblem(noise, static_cast<std::size_t>(d), std::move(f), lip, drift, std::move(theta_star));
}

// ---------------------------------------------------------------------------
// Runs

namespace {

void validate(const SaProblem& problem, const RunConfig& config) {
  if (static_cast<std::size_t>(config.theta0.size()) != problem.dim()) {
    throw InvalidInput("run_sa: theta0 has dimension " + std::to_string(config.theta0.size()) + ", expected " +
                       std::to_string(problem.dim()));
  }
  if (config.n_steps < 1) throw InvalidInput("run_sa: n_steps must be at least 1");
  if (config.x0 && *config.x0 >= problem.noise().size()) throw InvalidInput("run_sa: x0 out of range");
}

std::vector<std::size_t> checkpoint_grid(const RunConfig& config) {
  std::vector<std::size_t> ks{0, config.n_steps};
  if (config.checkpoint_every > 0) {
    for (std::size_t k = config.checkpoint_every; k < config.n_steps; k += config.checkpoint_every) ks.push_back(k);
  }
  for (std::size_t k : config.checkpoints) {
    if (k <= config.n_steps) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

}  // namespace

void run_sa_observed(const SaProblem& problem, const StepSchedule& schedule, const RunConfig& config,
                     const std::function<void(std::size_t, std::size_t, const Vector&)>& observe) {
  validate(problem, config);
  const detail::TransitionSampler sampler(problem.noise().transition());
  Rng rng(config.seed);
  std::size_t x = config.x0 ? *config.x0 : sampler.draw(problem.stationary().probabilities(), rng.uniform01());
  const double threshold = config.divergence_threshold.value_or(1e6 * (config.theta0.norm() + 1.0));

  Vector theta = config.theta0;
  Vector step(theta.size());
  for (std::size_t k = 0;; ++k) {
    if (!theta.allFinite()) throw NumericError("run_sa: non-finite iterate at k = " + std::to_string(k), k);
    if (observe) observe(k, x, theta);
    if (k == config.n_steps || theta.norm() > threshold) return;
    problem.update(x, theta, step);
    theta += schedule.eps(static_cast<std::int64_t>(k)) * step;
    x = sampler.next(x, rng.uniform01());
  }
}

RunResult run_sa(const SaProblem& problem, const StepSchedule& schedule, const RunConfig& config) {
  validate(problem, config);
  const std::vector<std::size_t> grid = checkpoint_grid(config);
  const double threshold = config.divergence_threshold.value_or(1e6 * (config.theta0.norm() + 1.0));
  const std::optional<Vector>& ts = problem.theta_star();

  RunResult result;
  result.seed = config.seed;
  std::size_t next = 0;
  std::size_t last_k = 0;
  run_sa_observed(problem, schedule, config, [&](std::size_t k, std::size_t, const Vector& theta) {
    last_k = k;
    if (next < grid.size() && grid[next] == k) {
      const double value = ts ? (theta - *ts).squaredNorm() : theta.squaredNorm();
      result.checkpoints.push_back({k, value});
      if (config.keep_snapshots) result.snapshots.push_back(theta);
      ++next;
    }
    if (k == config.n_steps || theta.norm() > threshold) result.final_theta = theta;
  });
  if (last_k < config.n_steps) {
    result.diverged = true;
    result.diverged_at = last_k;
  }
  return result;
}

std::vector<RunResult> run_replications(const SaProblem& problem, const StepSchedule& schedule,
                                        const RunConfig& config, std::size_t reps, std::uint64_t base_seed,
                                        std::size_t threads) {
  std::vector<RunResult> out(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t r = cursor++; r < reps; r = cursor++) {
      try {
        RunConfig c = config;
        c.seed = base_seed + r;
        out[r] = run_sa(problem, schedule, c);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(reps, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

MseCurve summarize(const std::vector<RunResult>& runs) {
  MseCurve curve;
  curve.reps = runs.size();
  const RunResult* reference = nullptr;
  for (const auto& run : runs) {
    if (run.diverged) {
      ++curve.diverged;
    } else if (!reference) {
      reference = &run;
    }
  }
  if (!reference) return curve;

  for (std::size_t i = 0; i < reference->checkpoints.size(); ++i) {
    MsePoint p;
    p.k = reference->checkpoints[i].k;
    double sum = 0.0;
    for (const auto& run : runs) {
      if (run.diverged) continue;
      sum += run.checkpoints[i].value;
      ++p.count;
    }
    p.mean = sum / static_cast<double>(p.count);
    if (p.count > 1) {
      double ss = 0.0;
      for (const auto& run : runs) {
        if (run.diverged) continue;
        const double dev = run.checkpoints[i].value - p.mean;
        ss += dev * dev;
      }
      p.std_error = std::sqrt(ss / static_cast<double>(p.count - 1) / static_cast<double>(p.count));
    }
    curve.points.push_back(p);
  }
  return curve;
}

MseCurve estimate_mse(const SaProblem& problem, const StepSchedule& schedule, const RunConfig& config,
                      std::size_t reps, std::uint64_t base_seed, std::size_t threads) {
  if (!problem.theta_star()) throw PreconditionError("estimate_mse: theta_star must be known");
  if (reps == 0) throw InvalidInput("estimate_mse: reps must be positive");
  return summarize(run_replications(problem, schedule, config, reps, base_seed, threads));
}

// ---------------------------------------------------------------------------
// Exact quantities

Vector expected_update(const SaProblem& problem, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != problem.dim()) throw InvalidInput("expected_update: wrong dimension");
  Vector sum = Vector::Zero(theta.size());
  Vector f(theta.size());
  const Distribution& mu = problem.stationary();
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (mu[x] == 0.0) continue;
    problem.update(x, theta, f);
    sum += mu[x] * f;
  }
  return sum;
}

double bias_norm(const SaProblem& problem, const Vector& theta, std::size_t x0, std::size_t k) {
  const std::size_t n = problem.noise().size();
  if (x0 >= n) throw InvalidInput("bias_norm: x0 out of range");
  if (static_cast<std::size_t>(theta.size()) != problem.dim()) throw InvalidInput("bias_norm: wrong dimension");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
  row(static_cast<Eigen::Index>(x0)) = 1.0;
  for (std::size_t i = 0; i < k; ++i) row = row * problem.noise().transition();

  Vector conditional = Vector::Zero(theta.size());
  Vector f(theta.size());
  for (std::size_t y = 0; y < n; ++y) {
    const double w = row(static_cast<Eigen::Index>(y));
    if (w == 0.0) continue;
    problem.update(y, theta, f);
    conditional += w * f;
  }
  return (conditional - expected_update(problem, theta)).norm();
}

// ---------------------------------------------------------------------------
// Step-size condition

MixingTimeFn mixing_time_fn(MixingProfile& profile, const StepSchedule& schedule, double lip) {
  return [&profile, schedule, lip](std::size_t k) {
    return profile.t_delta(schedule.eps(static_cast<std::int64_t>(k)), lip);
  };
}

namespace {
// Relative slack for comparing sums of doubles against a closed-form limit.
constexpr double kSlack = 1e-12;

bool within(double lhs, double rhs) { return lhs <= rhs * (1.0 + kSlack); }
}  // namespace

Condition1Verdict verify_condition1(const StepSchedule& schedule, double lip, double drift, const MixingTimeFn& t_of,
                                    std::size_t horizon) {
  if (!(lip > 0.0)) throw InvalidInput("verify_condition1: L must be positive");
  if (!(drift > 0.0)) throw InvalidInput("verify_condition1: drift must be positive");
  if (horizon < 1) throw InvalidInput("verify_condition1: horizon must be at least 1");
  if (!t_of) throw InvalidInput("verify_condition1: missing mixing-time function");

  const double window_limit = drift / (114.0 * lip * lip);
  const double start_limit = 1.0 / (4.0 * lip);
  Condition1Verdict verdict;

  if (schedule.kind() == StepSchedule::Kind::Constant) {
    const double eps = schedule.eps0();
    const std::size_t t = t_of(0);
    const double window = eps * static_cast<double>(t);
    if (!within(window, window_limit)) {
      verdict.reason = "eps * t_eps = " + std::to_string(window) + " exceeds alpha/(114 L^2) = " +
                       std::to_string(window_limit);
      return verdict;
    }
    const std::size_t k = std::max<std::size_t>(1, t);
    if (k > horizon) {
      verdict.reason = "t_eps exceeds the horizon";
      return verdict;
    }
    if (!within(eps * static_cast<double>(k), start_limit)) {
      verdict.reason = "eps_{0,K-1} exceeds 1/(4L) at K = " + std::to_string(k);
      return verdict;
    }
    verdict.k_start = k;
    return verdict;
  }

  // prefix[k] = ε_0 + … + ε_{k−1}
  std::vector<double> prefix(horizon + 1, 0.0);
  for (std::size_t k = 0; k < horizon; ++k) prefix[k + 1] = prefix[k] + schedule.eps(static_cast<std::int64_t>(k));

  std::size_t last_fail = 0;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const std::size_t t = t_of(k);
    const bool ok = t <= k && within(prefix[k] - prefix[k - t], window_limit);
    if (!ok) last_fail = k;
  }
  const std::size_t k_start = last_fail + 1;
  if (k_start > horizon) {
    verdict.reason = "window inequality still violated at the horizon k = " + std::to_string(horizon);
    return verdict;
  }
  if (!within(prefix[k_start], start_limit)) {
    verdict.reason = "eps_{0,K-1} = " + std::to_string(prefix[k_start]) + " exceeds 1/(4L) = " +
                     std::to_string(start_limit) + " at the first admissible K = " + std::to_string(k_start);
    return verdict;
  }
  verdict.k_start = k_start;
  return verdict;
}

PolynomialRecipe polynomial_step_recipe(double lip, double drift, double l1, double eps, double xi) {
  if (!(lip > 0.0) || !(drift > 0.0) || !(l1 > 0.0) || !(eps > 0.0)) {
    throw InvalidInput("polynomial_step_recipe: L, alpha, L1 and eps must be positive");
  }
  if (!(xi > 0.0 && xi <= 1.0)) throw InvalidInput("polynomial_step_recipe: xi must lie in (0,1]");
  PolynomialRecipe r;
  const double l2 = lip * lip;
  r.n_const = std::max(0.0, l1 * (std::log1p(drift / (114.0 * l2)) + 1.0 - std::log(eps)));
  // m ln m must stay positive and increasing; below e the construction collapses.
  const double m = std::max(l1 + r.n_const, std::numbers::e);
  const double base = 228.0 * eps * l2 * m * std::log(m) / drift;
  r.h = base > 0.0 ? std::pow(base, 1.0 / xi) : 0.0;
  // Keep the first step inside (0, 1].
  r.h = std::max(r.h, std::pow(eps, 1.0 / xi));
  r.k_start = drift * std::pow(r.h, xi) / (114.0 * eps * l2);
  return r;
}

}  // namespace salab
