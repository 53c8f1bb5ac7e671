#pragma once

#include "sa_lab/rl.hpp"
#include "sa_lab/sa.hpp"
#include "sa_lab/schedule.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace salab {

// ---------------------------------------------------------------------------
// Baird's seven-state counterexample

inline constexpr std::size_t kBairdStates = 7;
inline constexpr std::size_t kBairdActions = 2;
inline constexpr std::size_t kBairdDim = 14;
inline constexpr std::size_t kSolid = 0;   // to the seventh state
inline constexpr std::size_t kDashed = 1;  // to a uniformly chosen upper state

enum class RewardMode { Zero, UniformRandom };

struct BairdSpec {
  RewardMode reward = RewardMode::Zero;
  std::uint64_t reward_seed = 7;  // UniformRandom only; R(s,a) drawn once in (s, a) order
  double gamma = 0.7;
  bool normalize_features = false;
};

struct BairdModel {
  Mdp mdp;
  LinearFeatures features;
  Policy behavior;  // uniform over the two actions
};

// States 0–5 are the upper states, state 6 the seventh.
//   Q(sᵢ, solid)  = θ₀ + 2θᵢ         (i = 1..6)
//   Q(s₇, solid)  = 2θ₀ + 2θ₇
//   Q(sᵢ, dashed) = θ₇ + 2θ_{7+i}    (i = 1..6)
//   Q(s₇, dashed) = 2θ₇
BairdModel build_baird(const BairdSpec& spec);

// ---------------------------------------------------------------------------
// Fits

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y ≈ intercept + slope·x (at least two points).
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// OLS slope of ln(value) against ln(k) over the last tail_fraction of the points.
double loglog_slope(const std::vector<std::pair<double, double>>& series, double tail_fraction);

// ---------------------------------------------------------------------------
// fig1: ‖θ_k‖ under zero reward for several γ

struct Fig1Config {
  std::vector<double> gammas{0.7, 0.9, 0.97};
  double eps = 0.01;
  std::size_t n_steps = 20'000;
  std::size_t reps = 20;
  std::uint64_t base_seed = 1;
  std::size_t checkpoint_every = 100;
  double divergence_factor = 1e3;  // diverged once ‖θ_k‖ > factor·‖θ₀‖
  std::size_t threads = 1;
};

enum class Fig1Verdict { Converged, Diverged, Inconclusive };
std::string to_string(Fig1Verdict v);

struct NormPoint {
  std::size_t k = 0;
  double mean = 0.0;       // mean ‖θ_k‖ over replications that reached k
  double std_error = 0.0;
  std::size_t count = 0;
};

struct Fig1Series {
  double gamma = 0.0;
  std::vector<NormPoint> curve;
  std::size_t diverged = 0;
  std::vector<std::size_t> diverged_at;  // one entry per diverged replication, in order
  double mean_final_norm = 0.0;          // over replications that did not diverge
  Fig1Verdict verdict = Fig1Verdict::Inconclusive;
};

struct Fig1Result {
  Fig1Config config;
  double theta0_norm = 0.0;
  std::vector<Fig1Series> series;
};

// θ₀ = ones; verdict Diverged when at least 90% of replications diverge,
// Converged when none diverge and the mean final norm is below 0.1‖θ₀‖.
Fig1Result fig1_experiment(const Fig1Config& config);

// ---------------------------------------------------------------------------
// fig2: ln E‖θ_k‖² at γ = 0.7

struct Fig2Config {
  double gamma = 0.7;
  double eps = 0.01;
  std::size_t n_steps = 20'000;
  std::size_t reps = 100;
  std::uint64_t base_seed = 1;
  std::size_t checkpoint_every = 100;
  double floor = 1e-250;  // E‖θ_k‖² at or below this is numerical floor
  std::size_t threads = 1;
};

struct Fig2Result {
  Fig2Config config;
  MseCurve curve;        // E‖θ_k‖² (θ* = 0)
  LinearFit fit;         // ln E‖θ_k‖² against k, up to the floor
  std::size_t fit_points = 0;
};

Fig2Result fig2_experiment(const Fig2Config& config);

// ---------------------------------------------------------------------------
// fig3 and fig4: E‖θ_k − θ*‖² under ε/(k+h)^ξ with random rewards

struct Fig34Config {
  std::vector<double> xis{0.4, 0.6, 0.8, 1.0};
  std::optional<double> eps_for_xi1;  // default 2/κ̂
  double first_step = 0.2;            // ε_0, shared by every ξ
  double gamma = 0.7;
  std::uint64_t reward_seed = 7;
  std::size_t n_steps = 100'000;
  std::size_t reps = 100;
  std::uint64_t base_seed = 1;
  std::size_t checkpoint_every = 500;
  double tail_fraction = 0.5;
  std::size_t kappa_restarts = 64;
  std::size_t threads = 1;
};

struct Fig34Series {
  double xi = 0.0;
  StepSchedule schedule = StepSchedule::constant(0.5);
  MseCurve curve;
  double slope = 0.0;  // loglog_slope over the tail
};

struct Fig34Result {
  Fig34Config config;
  double kappa = 0.0;
  double delta_pi = 0.0;
  double eps_for_xi1 = 0.0;
  double h = 0.0;
  Vector theta_star;
  double theta_star_residual = 0.0;  // ‖F̄(θ*)‖
  std::vector<Fig34Series> series;
};

// The ξ = 1 coefficient ε must satisfy κ̂ε ≥ 2. With h = ε/ε_0 every schedule
// is ε_0 h^ξ / (k + h)^ξ, so all start from the same first step ε_0.
Fig34Result fig34_experiment(const Fig34Config& config);

// ---------------------------------------------------------------------------
// Artifacts: figN_<setting>.csv, figN.gp, figN_manifest.json. Returns the
// paths written.

std::vector<std::filesystem::path> write_fig1(const Fig1Result& r, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_fig2(const Fig2Result& r, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_fig3(const Fig34Result& r, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_fig4(const Fig34Result& r, const std::filesystem::path& dir);

}  // namespace salab
