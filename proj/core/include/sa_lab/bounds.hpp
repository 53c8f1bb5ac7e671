#pragma once

#include "sa_lab/markov.hpp"
#include "sa_lab/sa.hpp"
#include "sa_lab/schedule.hpp"

#include <cstddef>
#include <vector>

namespace salab {

struct BoundConstants {
  double beta1 = 1.0;
  double beta2 = 1.0;
  double alpha = 1.0;
  double lip = 1.0;
  double l1 = 1.0;
  std::size_t k_start = 0;  // K
};

struct BetaPair {
  double beta1;
  double beta2;
};

// β₁ = (‖θ₀‖ + ‖θ₀ − θ*‖ + 1)², β₂ = 114 L² (‖θ*‖ + 1)².
// With L replaced by M these are the η₁, η₂ of the Q-learning bounds.
BetaPair beta_constants(const Vector& theta0, const Vector& theta_star, double lip);

// β₁ Π_{j=K}^{k−1}(1 − αε_j) + β₂ Σ_{i=K}^{k−1} ε̂_i Π_{j=i+1}^{k−1}(1 − αε_j)
// with ε̂_i = ε_i ε_{i−t_i,i−1}. The window is clamped at zero.
double theorem1_bound(const BoundConstants& c, const StepSchedule& schedule, const MixingTimeFn& t_of, std::size_t k);

// The same bound at every k in `ks` (sorted, each ≥ K) in one forward sweep.
std::vector<double> theorem1_curve(const BoundConstants& c, const StepSchedule& schedule, const MixingTimeFn& t_of,
                                   const std::vector<std::size_t>& ks);

// β₁(1 − αε)^{k−t_ε} + β₂ ε t_ε / α; requires ε t_ε ≤ α / (114 L²) and k ≥ t_ε.
double corollary1_bound(const BoundConstants& c, double eps, std::size_t t_eps, std::size_t k);

// Bound for ε_k = ε / (k + h)^ξ at k ≥ K. For ξ < 1 additionally requires
// K + h ≥ (2ξ / (αε))^{1/(1−ξ)}.
double corollary2_bound(const BoundConstants& c, double eps, double h, double xi, std::size_t k);

// η₁(1 − κε/2)^{k−t_ε} + 2η₂ ε t_ε / κ; requires ε t_ε ≤ κ / (228 M²).
double qlearning_bound_constant(double eta1, double eta2, double kappa, double m, double eps, std::size_t t_eps,
                                std::size_t k);

// η₁((K′+h)/(k+h))^{κε/2} + 16e η₂ ε² M₁ / (κε − 2) · (ln((k+h)/ε) + 1) / (k+h); requires ε > 2/κ.
double qlearning_bound_diminishing(double eta1, double eta2, double kappa, double eps, double h, double m1,
                                   std::size_t k_prime, std::size_t k);

}  // namespace salab
