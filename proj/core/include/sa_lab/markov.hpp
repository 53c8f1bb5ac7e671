#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace salab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A probability vector over a finite state space.
class Distribution {
 public:
  // Validates nonnegativity and unit mass within `tol`.
  explicit Distribution(Vector probabilities, double tol = 1e-12);

  static Distribution uniform(std::size_t n);
  static Distribution point_mass(std::size_t n, std::size_t at);

  std::size_t size() const { return static_cast<std::size_t>(p_.size()); }
  double operator[](std::size_t i) const { return p_(static_cast<Eigen::Index>(i)); }
  const Vector& probabilities() const { return p_; }

 private:
  Vector p_;
};

// ½ Σ |ν₁(x) − ν₂(x)|.
double tv_distance(const Distribution& nu1, const Distribution& nu2);

// Row-stochastic transition matrix over labeled states.
class FiniteMarkovChain {
 public:
  // Rows must sum to one within `row_tol`; they are renormalized afterwards.
  // Empty `labels` defaults to "0", "1", ...
  explicit FiniteMarkovChain(Matrix transition, std::vector<std::string> labels = {},
                             double row_tol = 1e-9);

  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  const Matrix& transition() const { return p_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Distribution row(std::size_t x) const;

 private:
  Matrix p_;
  std::vector<std::string> labels_;
};

// True iff the positive-entry graph is strongly connected with period 1,
// i.e. the matrix is primitive (checked through Wielandt's bound).
bool check_irreducible_aperiodic(const FiniteMarkovChain& chain);

// Power iteration on μ ← μP from the uniform vector until TV(μP, μ) ≤ tol.
Distribution stationary_distribution(const FiniteMarkovChain& chain, double tol = 1e-13);

// Caches the exact powers P^k and the distances d_max(k) for one chain.
// Not thread-safe; copy one per thread.
class MixingProfile {
 public:
  static constexpr std::size_t kMixingCap = 1'000'000;

  explicit MixingProfile(const FiniteMarkovChain& chain, double stationary_tol = 1e-13);

  const Distribution& stationary() const { return mu_; }

  // max_x TV(P^k(x,·), μ).
  double d_max(std::size_t k);

  // min{k : d_max(k) ≤ delta}.
  std::size_t mixing_time(double delta);

  // t_mix(delta / (2 lip)).
  std::size_t t_delta(double delta, double lip);

  // Number of powers computed so far (d_max(0..computed()-1) are cached).
  std::size_t computed() const { return d_.size(); }

 private:
  void extend();

  Matrix p_;
  Distribution mu_;
  Matrix power_;  // P^(computed()-1)
  std::vector<double> d_;
  bool stalled_ = false;
};

double d_max(const FiniteMarkovChain& chain, std::size_t k);
std::size_t mixing_time(const FiniteMarkovChain& chain, double delta);
std::size_t t_delta(const FiniteMarkovChain& chain, double delta, double lip);

// Geometric envelope d_max(k) ≤ C ρ^k.
struct MixingFit {
  double c_const = 1.0;
  double rho = 0.5;

  // L₁ = max(1, ln 2CL) / ln(1/ρ) for Lipschitz constant `lip`.
  double l1(double lip) const;
};

// Least-squares fit of ln d_max(k) against k over k ≤ k_max (points with
// d_max(k) ≤ 1e-14 are numerically zero and skipped). C is then inflated until
// d_max(k) ≤ C ρ^(k+1) on every fitted point, which makes d_max(⌊t⌋) ≤ C ρ^t
// hold for real t as well.
MixingFit fit_geometric_mixing(const FiniteMarkovChain& chain, std::size_t k_max);
MixingFit fit_geometric_mixing(MixingProfile& profile, std::size_t k_max);

double l1_constant(double c_const, double rho, double lip);

// X_0 = x0 followed by length-1 transitions; deterministic for a fixed seed.
std::vector<std::size_t> sample_trajectory(const FiniteMarkovChain& chain, std::size_t x0,
                                           std::size_t length, std::uint64_t seed);

namespace detail {
double tv_distance_raw(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// Cumulative row sums used for inverse-CDF sampling.
class TransitionSampler {
 public:
  explicit TransitionSampler(const Matrix& transition);
  std::size_t next(std::size_t from, double u) const;
  std::size_t draw(const Vector& probabilities, double u) const;

 private:
  std::vector<std::vector<double>> cdf_;
};
}  // namespace detail

}  // namespace salab
