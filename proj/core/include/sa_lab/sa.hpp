#pragma once

#include "sa_lab/markov.hpp"
#include "sa_lab/schedule.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace salab {

// F(x, θ) written into `out` (already sized to the problem dimension).
using UpdateMap = std::function<void(std::size_t x, const Vector& theta, Vector& out)>;

// Root finding for F̄(θ) = E_μ[F(X, θ)] = 0 with X driven by a finite chain.
class SaProblem {
 public:
  // `lip` is the L with ‖F(x,θ₁) − F(x,θ₂)‖ ≤ L‖θ₁ − θ₂‖ and L ≥ max_x ‖F(x,0)‖.
  // `drift` is α in (θ−θ*)ᵀF̄(θ) ≤ −α‖θ−θ*‖²; absent when not certified.
  SaProblem(FiniteMarkovChain noise, std::size_t dim, UpdateMap update, double lip,
            std::optional<double> drift, std::optional<Vector> theta_star = std::nullopt);

  const FiniteMarkovChain& noise() const { return noise_; }
  const Distribution& stationary() const { return mu_; }
  std::size_t dim() const { return dim_; }
  double lip() const { return lip_; }
  const std::optional<double>& drift() const { return drift_; }
  const std::optional<Vector>& theta_star() const { return theta_star_; }

  void update(std::size_t x, const Vector& theta, Vector& out) const { update_(x, theta, out); }
  Vector update(std::size_t x, const Vector& theta) const;

  // Copy with θ* replaced.
  SaProblem with_theta_star(Vector theta_star) const;

 private:
  FiniteMarkovChain noise_;
  Distribution mu_;
  std::size_t dim_;
  UpdateMap update_;
  double lip_;
  std::optional<double> drift_;
  std::optional<Vector> theta_star_;
};

// F(x, θ) = A_x (θ − θ*) + b_x with Σ_x μ(x) b_x = 0 enforced by centering.
// L and α are computed exactly: L = max(max_x ‖A_x‖₂, max_x ‖F(x,0)‖),
// α = −λ_max(sym(Σ μ(x) A_x)).
SaProblem make_linear_problem(const FiniteMarkovChain& noise, std::vector<Matrix> a, std::vector<Vector> b,
                              Vector theta_star);

// ---------------------------------------------------------------------------
// Single runs

struct Checkpoint {
  std::size_t k = 0;
  double value = 0.0;  // ‖θ_k − θ*‖², or ‖θ_k‖² when θ* is unknown
};

struct RunConfig {
  Vector theta0;
  std::optional<std::size_t> x0;  // empty: X_0 drawn from μ
  std::size_t n_steps = 1;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;        // 0: only k = 0 and k = n_steps
  std::vector<std::size_t> checkpoints;    // extra checkpoints, merged with the above
  std::optional<double> divergence_threshold;  // default 10⁶ (‖θ₀‖ + 1)
  bool keep_snapshots = false;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;  // strictly increasing in k
  std::vector<Vector> snapshots;        // θ_k per checkpoint when requested
  bool diverged = false;
  std::optional<std::size_t> diverged_at;
  Vector final_theta;
};

// θ_{k+1} = θ_k + ε_k F(X_k, θ_k). Stops early and flags divergence when
// ‖θ_k‖ exceeds the threshold; throws NumericError on a non-finite iterate.
RunResult run_sa(const SaProblem& problem, const StepSchedule& schedule, const RunConfig& config);

// Visitor variant: `observe(k, x_k, θ_k)` is called for every k ≤ n_steps reached.
void run_sa_observed(const SaProblem& problem, const StepSchedule& schedule, const RunConfig& config,
                     const std::function<void(std::size_t, std::size_t, const Vector&)>& observe);

// ---------------------------------------------------------------------------
// Replications

// Replication r uses seed base_seed + r; the output is ordered by r no matter
// how many threads run it.
std::vector<RunResult> run_replications(const SaProblem& problem, const StepSchedule& schedule,
                                        const RunConfig& config, std::size_t reps, std::uint64_t base_seed,
                                        std::size_t threads = 1);

struct MsePoint {
  std::size_t k = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / √count
  std::size_t count = 0;
};

struct MseCurve {
  std::vector<MsePoint> points;
  std::size_t reps = 0;
  std::size_t diverged = 0;  // diverged replications are excluded from the means

  double diverged_fraction() const { return reps ? static_cast<double>(diverged) / static_cast<double>(reps) : 0.0; }
};

MseCurve summarize(const std::vector<RunResult>& runs);

MseCurve estimate_mse(const SaProblem& problem, const StepSchedule& schedule, const RunConfig& config,
                      std::size_t reps, std::uint64_t base_seed, std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Exact quantities

// Σ_x μ(x) F(x, θ).
Vector expected_update(const SaProblem& problem, const Vector& theta);

// ‖Σ_y P^k(x0, y) F(y, θ) − F̄(θ)‖.
double bias_norm(const SaProblem& problem, const Vector& theta, std::size_t x0, std::size_t k);

// ---------------------------------------------------------------------------
// Step-size condition

// t_k: the mixing time at the precision of step k.
using MixingTimeFn = std::function<std::size_t(std::size_t k)>;

// t_k = t_mix(ε_k / 2L) from an exact mixing profile.
MixingTimeFn mixing_time_fn(MixingProfile& profile, const StepSchedule& schedule, double lip);

struct Condition1Verdict {
  std::optional<std::size_t> k_start;  // K when feasible
  std::string reason;                  // why not, otherwise empty

  bool feasible() const { return k_start.has_value(); }
};

// Minimal K ≤ horizon with ε_{0,K−1} ≤ 1/(4L), and for every k in [K, horizon]
// both k ≥ t_k and ε_{k−t_k,k−1} ≤ α/(114L²).
//
// The window is required to fit inside the trajectory (k ≥ t_k) instead of
// being clamped at zero; otherwise a constant schedule would report K = 1
// rather than t_ε. For a constant schedule the window sum is ε·t_ε for every
// k, so one check decides all k. For a polynomial schedule ε_k decreases and
// t_k grows only logarithmically, so once the window sum drops below the
// limit it stays there and a finite horizon suffices.
Condition1Verdict verify_condition1(const StepSchedule& schedule, double lip, double drift, const MixingTimeFn& t_of,
                                    std::size_t horizon = 1'000'000);

// Sufficient (not minimal) choice of h and K for ε/(k+h)^ξ.
struct PolynomialRecipe {
  double n_const = 0.0;
  double h = 0.0;
  double k_start = 0.0;
};

PolynomialRecipe polynomial_step_recipe(double lip, double drift, double l1, double eps, double xi);

}  // namespace salab
