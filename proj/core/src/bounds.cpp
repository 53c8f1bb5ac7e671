#include "sa_lab/bounds.hpp"

#include "sa_lab/error.hpp"

#include <cmath>
#include <numbers>

namespace salab {

namespace {

constexpr double kSlack = 1e-12;

void check_constants(const BoundConstants& c) {
  if (!(c.alpha > 0.0)) throw InvalidInput("bound constants: alpha must be positive");
  if (!(c.lip > 0.0)) throw InvalidInput("bound constants: L must be positive");
  if (!(c.beta1 >= 0.0) || !(c.beta2 >= 0.0)) throw InvalidInput("bound constants: beta must be nonnegative");
}

double geometric_bound(double beta1, double beta2, double alpha, double lip, double eps, std::size_t t_eps,
                       std::size_t k, double denominator) {
  const double lhs = eps * static_cast<double>(t_eps);
  const double rhs = alpha / (denominator * lip * lip);
  if (lhs > rhs * (1.0 + kSlack)) {
    throw PremiseViolation("step size too large: eps * t_eps exceeds its limit", lhs, rhs);
  }
  if (k < t_eps) throw InvalidInput("bound evaluated before k = t_eps");
  if (!(alpha * eps < 1.0)) throw PremiseViolation("contraction factor 1 - alpha*eps is not positive", alpha * eps, 1.0);
  return beta1 * std::pow(1.0 - alpha * eps, static_cast<double>(k - t_eps)) + beta2 * lhs / alpha;
}

// The ξ = 1 case with the three regimes of αε.
double harmonic_bound(double beta1, double beta2, double alpha, double l1, std::size_t k_start, double eps, double h,
                      std::size_t k) {
  const double kh = static_cast<double>(k) + h;
  const double k0h = static_cast<double>(k_start) + h;
  const double ae = alpha * eps;
  const double log_term = std::log(kh / eps) + 1.0;
  const double bias = beta1 * std::pow(k0h / kh, ae);
  if (std::abs(ae - 1.0) <= kSlack) {
    return bias + 8.0 * beta2 * eps * eps * l1 * std::log(kh / k0h) * log_term / kh;
  }
  if (ae < 1.0) {
    return bias + 8.0 * beta2 * eps * eps * l1 / (1.0 - ae) * log_term / std::pow(kh, ae);
  }
  return bias + 8.0 * std::numbers::e * beta2 * eps * eps * l1 / (ae - 1.0) * log_term / kh;
}

}  // namespace

BetaPair beta_constants(const Vector& theta0, const Vector& theta_star, double lip) {
  if (theta0.size() != theta_star.size()) throw InvalidInput("beta_constants: dimension mismatch");
  const double b1 = theta0.norm() + (theta0 - theta_star).norm() + 1.0;
  const double b2 = theta_star.norm() + 1.0;
  return {b1 * b1, 114.0 * lip * lip * b2 * b2};
}

std::vector<double> theorem1_curve(const BoundConstants& c, const StepSchedule& schedule, const MixingTimeFn& t_of,
                                   const std::vector<std::size_t>& ks) {
  check_constants(c);
  if (!t_of) throw InvalidInput("theorem1: missing mixing-time function");
  std::vector<double> out;
  out.reserve(ks.size());
  if (ks.empty()) return out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < c.k_start) throw InvalidInput("theorem1: k must be at least K");
    if (i > 0 && ks[i] < ks[i - 1]) throw InvalidInput("theorem1: checkpoints must be sorted");
  }

  // Forward sweep: log_bias = Σ ln(1 − αε_j), var = Σ ε̂_i Π(1 − αε_j).
  double log_bias = 0.0;
  double var = 0.0;
  std::size_t next = 0;
  for (std::size_t j = c.k_start;; ++j) {
    while (next < ks.size() && ks[next] == j) {
      out.push_back(c.beta1 * std::exp(log_bias) + c.beta2 * var);
      ++next;
    }
    if (next == ks.size()) break;
    const auto jj = static_cast<std::int64_t>(j);
    const double eps_j = schedule.eps(jj);
    const double factor = 1.0 - c.alpha * eps_j;
    if (!(factor > 0.0)) {
      throw PremiseViolation("theorem1: 1 - alpha*eps_j is not positive at j = " + std::to_string(j),
                             c.alpha * eps_j, 1.0);
    }
    const auto t = static_cast<std::int64_t>(t_of(j));
    const double eps_hat = eps_j * schedule.partial_sum(jj - t, jj - 1);
    log_bias += std::log(factor);
    var = var * factor + eps_hat;
  }
  return out;
}

double theorem1_bound(const BoundConstants& c, const StepSchedule& schedule, const MixingTimeFn& t_of, std::size_t k) {
  return theorem1_curve(c, schedule, t_of, {k}).front();
}

double corollary1_bound(const BoundConstants& c, double eps, std::size_t t_eps, std::size_t k) {
  check_constants(c);
  return geometric_bound(c.beta1, c.beta2, c.alpha, c.lip, eps, t_eps, k, 114.0);
}

double corollary2_bound(const BoundConstants& c, double eps, double h, double xi, std::size_t k) {
  check_constants(c);
  if (!(eps > 0.0) || !(h >= 0.0)) throw InvalidInput("corollary2: eps must be positive and h nonnegative");
  if (!(xi > 0.0 && xi <= 1.0)) throw InvalidInput("corollary2: xi must lie in (0,1]");
  if (k < c.k_start) throw InvalidInput("corollary2: k must be at least K");
  if (!(static_cast<double>(c.k_start) + h > 0.0)) throw InvalidInput("corollary2: K + h must be positive");
  if (xi == 1.0) return harmonic_bound(c.beta1, c.beta2, c.alpha, c.l1, c.k_start, eps, h, k);

  const double ae = c.alpha * eps;
  const double k0h = static_cast<double>(c.k_start) + h;
  const double kh = static_cast<double>(k) + h;
  const double needed = std::pow(2.0 * xi / ae, 1.0 / (1.0 - xi));
  if (k0h < needed * (1.0 - kSlack)) throw PremiseViolation("corollary2: K + h below (2 xi/(alpha eps))^(1/(1-xi))", k0h, needed);
  const double bias = c.beta1 * std::exp(-ae / (1.0 - xi) * (std::pow(kh, 1.0 - xi) - std::pow(k0h, 1.0 - xi)));
  const double variance = 4.0 * c.beta2 * eps * eps * c.l1 / ae * (std::log(kh / eps) + 1.0) / std::pow(kh, xi);
  return bias + variance;
}

double qlearning_bound_constant(double eta1, double eta2, double kappa, double m, double eps, std::size_t t_eps,
                                std::size_t k) {
  if (!(kappa > 0.0)) throw InvalidInput("qlearning bound: kappa must be positive");
  if (!(m > 0.0)) throw InvalidInput("qlearning bound: M must be positive");
  // α = κ/2 turns 114 L² into 228 M² in the premise.
  return geometric_bound(eta1, eta2, kappa / 2.0, m, eps, t_eps, k, 114.0);
}

double qlearning_bound_diminishing(double eta1, double eta2, double kappa, double eps, double h, double m1,
                                   std::size_t k_prime, std::size_t k) {
  if (!(kappa > 0.0)) throw InvalidInput("qlearning bound: kappa must be positive");
  if (!(eps > 2.0 / kappa)) throw PremiseViolation("qlearning bound: requires eps > 2/kappa", 2.0 / kappa, eps);
  if (k < k_prime) throw InvalidInput("qlearning bound: k must be at least K'");
  if (!(static_cast<double>(k_prime) + h > 0.0)) throw InvalidInput("qlearning bound: K' + h must be positive");
  return harmonic_bound(eta1, eta2, kappa / 2.0, m1, k_prime, eps, h, k);
}

}  // namespace salab
