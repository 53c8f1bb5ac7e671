#pragma once

#include "sa_lab/markov.hpp"
#include "sa_lab/sa.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace salab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Finite discounted MDP (S, A, P, R, γ).
class Mdp {
 public:
  // transitions[a] is the |S|×|S| matrix P_a; reward is |S|×|A| with entries
  // in [0, r_max]. r_max defaults to the largest reward.
  Mdp(std::vector<Matrix> transitions, Matrix reward, double gamma, std::optional<double> r_max = std::nullopt);

  std::size_t n_states() const { return static_cast<std::size_t>(reward_.rows()); }
  std::size_t n_actions() const { return static_cast<std::size_t>(reward_.cols()); }
  const Matrix& transition(std::size_t a) const { return p_[a]; }
  double p(std::size_t a, std::size_t s, std::size_t s2) const {
    return p_[a](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2));
  }
  double reward(std::size_t s, std::size_t a) const {
    return reward_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const Matrix& rewards() const { return reward_; }
  double gamma() const { return gamma_; }
  double r_max() const { return r_max_; }

  Mdp with_gamma(double gamma) const;

 private:
  std::vector<Matrix> p_;
  Matrix reward_;
  double gamma_;
  double r_max_;
};

// π(a|s) as an |S|×|A| row-stochastic matrix.
class Policy {
 public:
  explicit Policy(Matrix probs);

  static Policy uniform(std::size_t n_states, std::size_t n_actions);
  static Policy deterministic(const std::vector<std::size_t>& actions, std::size_t n_actions);

  std::size_t n_states() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t n_actions() const { return static_cast<std::size_t>(probs_.cols()); }
  double operator()(std::size_t s, std::size_t a) const {
    return probs_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const Matrix& probs() const { return probs_; }

  // The single action of a deterministic policy at s; throws otherwise.
  std::size_t action(std::size_t s) const;

 private:
  Matrix probs_;
};

// Φ with row s·|A| + a equal to φ(s, a)ᵀ.
class LinearFeatures {
 public:
  enum class RankPolicy { Require, Allow };

  LinearFeatures(Matrix phi, std::size_t n_states, std::size_t n_actions, RankPolicy rank = RankPolicy::Require);

  std::size_t dim() const { return static_cast<std::size_t>(phi_.cols()); }
  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t row(std::size_t s, std::size_t a) const { return s * n_actions_ + a; }
  const Matrix& phi() const { return phi_; }
  const RowMatrix& phi_rows() const { return rows_; }
  auto phi(std::size_t s, std::size_t a) const { return rows_.row(static_cast<Eigen::Index>(row(s, a))); }

  // max ‖φ(s,a)‖ ≤ 1 (within 1e−12).
  bool normalized() const { return max_row_norm_ <= 1.0 + 1e-12; }
  double max_row_norm() const { return max_row_norm_; }

  // Φ divided by its largest row norm.
  LinearFeatures normalized_copy() const;

 private:
  Matrix phi_;
  RowMatrix rows_;
  std::size_t n_states_;
  std::size_t n_actions_;
  double max_row_norm_;
};

struct Triple {
  std::size_t s;
  std::size_t a;
  std::size_t s_next;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Chain over X = {(s, a, s′) : π(a|s) > 0, P_a(s, s′) > 0} in lexicographic order.
struct InducedChain {
  FiniteMarkovChain chain;
  std::vector<Triple> triples;
};

InducedChain induced_chain(const Mdp& mdp, const Policy& policy);

// P_π(s, s′) = Σ_a π(a|s) P_a(s, s′).
FiniteMarkovChain state_chain(const Mdp& mdp, const Policy& policy);

// φ(s,a) (R(s,a) + γ max_a′ φ(s′,a′)ᵀθ − φ(s,a)ᵀθ).
void q_update_value(const LinearFeatures& features, const Mdp& mdp, const Triple& x, const Vector& theta, Vector& out);
Vector q_update_value(const LinearFeatures& features, const Mdp& mdp, const Triple& x, const Vector& theta);

// M = 1 + γ + r_max.
double lipschitz_constant(const Mdp& mdp);

// Q-learning with linear features as a stochastic-approximation problem.
struct QProblem {
  Mdp mdp;
  Policy policy;
  LinearFeatures features;
  InducedChain induced;
  Distribution state_marginal;  // stationary distribution of the state chain under π
  double m;                     // Lipschitz constant
  std::optional<Vector> theta_star;

  static QProblem build(Mdp mdp, Policy policy, LinearFeatures features);
};

// Σ_{s,a} μ(s)π(a|s) φ(s,a)(R(s,a) + γ Σ_s′ P_a(s,s′) max_a′ φ(s′,a′)ᵀθ − φ(s,a)ᵀθ).
Vector q_mean_update(const QProblem& qp, const Vector& theta);

// Noise = induced chain, F = q_update_value, L = M, α = κ/2 when κ > 0.
SaProblem to_sa_problem(const QProblem& qp, std::optional<double> kappa = std::nullopt);

// Damped iteration θ ← θ + step·F̄(θ) from zero until ‖F̄(θ)‖ ≤ tol.
Vector solve_theta_star(const QProblem& qp, double step = 0.1, double tol = 1e-10, std::size_t max_iter = 1'000'000);

// argmax_a φ(s,a)ᵀθ per state, ties to the lowest action index.
Policy greedy_policy(const LinearFeatures& features, const Vector& theta);

}  // namespace salab
