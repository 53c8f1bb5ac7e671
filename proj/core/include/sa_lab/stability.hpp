#pragma once

#include "sa_lab/linalg.hpp"
#include "sa_lab/rl.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace salab {

// Φᵀ D Φ with D = diag(μ(s) π(a|s)).
SymMatrix sigma_mu_pi(const LinearFeatures& features, const Distribution& mu_s, const Policy& policy);

// Φ_bᵀ D_μ Φ_b where row s of Φ_b is φ(s, b(s))ᵀ.
SymMatrix sigma_mu_b(const LinearFeatures& features, const Distribution& mu_s, const std::vector<std::size_t>& b);

struct DeltaPiOptions {
  double tol = 1e-12;                       // for λ_max and Σ_{μ,π} positive definiteness
  std::uint64_t enumeration_cap = 1'000'000;  // on |A|^|S|
  bool allow_sampling = false;              // sample policies instead of failing above the cap
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct DeltaPiResult {
  double value = 0.0;
  std::vector<std::size_t> minimizing_policy;
  bool exhaustive = true;     // false: value is an upper estimate from sampled policies
  std::uint64_t evaluated = 0;
};

// min over deterministic b of 1 / λ_max(Σ_{μ,π}^{−1/2} Σ_{μ,b} Σ_{μ,π}^{−1/2}), with μ
// the stationary distribution of the state chain under π.
DeltaPiResult delta_pi(const LinearFeatures& features, const Mdp& mdp, const Policy& policy,
                       const DeltaPiOptions& options = {});

// min over unit θ of E_μ[(φ(s,a)ᵀθ)²] − γ² E_μ[max_a (φ(s,a)ᵀθ)²].
// Projected subgradient on the sphere from `restarts` random starts, each
// followed by alternating refinement: fix the maximizing action per state and
// jump to the bottom eigenvector of Σ_{μ,π} − γ²Σ_{μ,b}. Returns the smallest
// objective value found.
double kappa_estimate(const LinearFeatures& features, const Mdp& mdp, const Policy& policy, double gamma,
                      std::size_t restarts = 64, std::uint64_t seed = 0);

// The objective of kappa_estimate at one θ (not normalized).
double kappa_objective(const LinearFeatures& features, const Distribution& mu_s, const Policy& policy, double gamma,
                       const Vector& theta);

enum class GasVerdict { GAS, NotGAS, Boundary };

std::string to_string(GasVerdict v);

struct ScalarStability {
  double h_plus = 0.0;
  double h_minus = 0.0;
  double r_pi = 0.0;
  GasVerdict verdict = GasVerdict::Boundary;
};

// d = 1 only. h± = E[γ φ(s,a) max/min_a′ φ(s′,a′) − φ(s,a)²], r_π = E[φ(s,a) R(s,a)].
// Signs within 1e−12 of zero are ambiguous; if the verdict depends on how
// they are read, the result is Boundary.
ScalarStability h_plus_minus(const LinearFeatures& features, const Mdp& mdp, const Policy& policy);

struct FeasibilityVerdict {
  bool infeasible = false;
  std::string reason;
};

// Infeasible for every behavior policy when d = |S||A| and γ² ≥ 1/|A|.
FeasibilityVerdict full_dim_feasibility(const Mdp& mdp, const LinearFeatures& features, double gamma);

struct StabilityReport {
  double gamma = 0.0;
  double delta_pi = 0.0;
  double gamma_threshold = 0.0;  // √δ(π)
  bool delta_exhaustive = true;
  std::vector<std::size_t> minimizing_policy;
  double kappa = 0.0;
  std::optional<double> h_plus;
  std::optional<double> h_minus;
  std::optional<double> r_pi;
  std::optional<GasVerdict> gas_verdict;
  std::optional<bool> full_dim_infeasible;
  std::string full_dim_reason;

  bool certified() const { return delta_pi > gamma * gamma; }
};

StabilityReport stability_report(const LinearFeatures& features, const Mdp& mdp, const Policy& policy,
                                 const DeltaPiOptions& options = {}, std::size_t kappa_restarts = 64,
                                 std::uint64_t seed = 0);

}  // namespace salab
