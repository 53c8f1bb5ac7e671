#include "sa_lab/stability.hpp"

#include "sa_lab/error.hpp"
#include "sa_lab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace salab {

namespace {

void check_shapes(const LinearFeatures& features, const Distribution& mu_s) {
  if (mu_s.size() != features.n_states()) throw InvalidInput("state distribution does not match the feature matrix");
}

Distribution state_marginal(const Mdp& mdp, const Policy& policy) {
  return stationary_distribution(state_chain(mdp, policy));
}

}  // namespace

SymMatrix sigma_mu_pi(const LinearFeatures& features, const Distribution& mu_s, const Policy& policy) {
  check_shapes(features, mu_s);
  if (policy.n_states() != features.n_states() || policy.n_actions() != features.n_actions()) {
    throw InvalidInput("policy does not match the feature matrix");
  }
  Vector w(static_cast<Eigen::Index>(features.n_states() * features.n_actions()));
  for (std::size_t s = 0; s < features.n_states(); ++s)
    for (std::size_t a = 0; a < features.n_actions(); ++a)
      w(static_cast<Eigen::Index>(features.row(s, a))) = mu_s[s] * policy(s, a);
  const Matrix& phi = features.phi();
  Matrix out = phi.transpose() * w.asDiagonal() * phi;
  return SymMatrix(0.5 * (out + out.transpose()));
}

SymMatrix sigma_mu_b(const LinearFeatures& features, const Distribution& mu_s, const std::vector<std::size_t>& b) {
  check_shapes(features, mu_s);
  if (b.size() != features.n_states()) throw InvalidInput("sigma_mu_b: need one action per state");
  const auto d = static_cast<Eigen::Index>(features.dim());
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (b[s] >= features.n_actions()) throw InvalidInput("sigma_mu_b: action index out of range");
    const Vector f = features.phi(s, b[s]).transpose();
    out.noalias() += mu_s[s] * f * f.transpose();
  }
  return SymMatrix(0.5 * (out + out.transpose()));
}

// ---------------------------------------------------------------------------
// δ(π)

DeltaPiResult delta_pi(const LinearFeatures& features, const Mdp& mdp, const Policy& policy,
                       const DeltaPiOptions& options) {
  const std::size_t n_s = features.n_states();
  const std::size_t n_a = features.n_actions();
  const Distribution mu = state_marginal(mdp, policy);

  // |A|^|S| with early exit above the cap.
  std::uint64_t count = 1;
  bool over_cap = false;
  for (std::size_t s = 0; s < n_s && !over_cap; ++s) {
    if (count > options.enumeration_cap / n_a) {
      over_cap = true;
    } else {
      count *= n_a;
      over_cap = count > options.enumeration_cap;
    }
  }
  if (over_cap && !options.allow_sampling) {
    throw EnumerationCapExceeded("delta_pi: |A|^|S| exceeds the enumeration cap of " +
                                 std::to_string(options.enumeration_cap) +
                                 "; enable policy sampling to get an estimate");
  }

  const SymMatrix root = inv_sqrt(sigma_mu_pi(features, mu, policy), options.tol);
  // ψ(s,a) = √μ(s) Σ^{-1/2} φ(s,a), so that the whitened Σ_b is Σ_s ψψᵀ.
  const auto d = static_cast<Eigen::Index>(features.dim());
  std::vector<Vector> psi(n_s * n_a);
  for (std::size_t s = 0; s < n_s; ++s)
    for (std::size_t a = 0; a < n_a; ++a)
      psi[features.row(s, a)] = std::sqrt(mu[s]) * (root.matrix() * features.phi(s, a).transpose());

  auto ratio_for = [&](const std::vector<std::size_t>& b) {
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t s = 0; s < n_s; ++s) {
      const Vector& v = psi[features.row(s, b[s])];
      m.noalias() += v * v.transpose();
    }
    const double top = lambda_max(SymMatrix(0.5 * (m + m.transpose())), options.tol);
    return top > 0.0 ? 1.0 / top : std::numeric_limits<double>::infinity();
  };

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::size_t> policy;
  };
  const bool exhaustive = !over_cap;
  const std::uint64_t total = exhaustive ? count : options.samples;

  auto policy_at = [&](std::uint64_t i, std::vector<std::size_t>& b) {
    if (exhaustive) {
      for (std::size_t s = 0; s < n_s; ++s) {
        b[s] = static_cast<std::size_t>(i % n_a);
        i /= n_a;
      }
    } else {
      Rng rng(options.seed + i);
      for (std::size_t s = 0; s < n_s; ++s) b[s] = static_cast<std::size_t>(rng.below(n_a));
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(options.threads, 1, 64);
  std::vector<Best> partial(n_threads);
  auto work = [&](std::size_t t) {
    std::vector<std::size_t> b(n_s);
    Best& best = partial[t];
    for (std::uint64_t i = t; i < total; i += n_threads) {
      policy_at(i, b);
      const double r = ratio_for(b);
      if (r < best.value) {
        best.value = r;
        best.index = i;
        best.policy = b;
      }
    }
  };
  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  Best best;
  for (const auto& p : partial) {
    if (p.value < best.value || (p.value == best.value && p.index < best.index)) best = p;
  }

  DeltaPiResult out;
  out.value = best.value;
  out.minimizing_policy = best.policy;
  out.exhaustive = exhaustive;
  out.evaluated = total;
  return out;
}

// ---------------------------------------------------------------------------
// κ

namespace {

// Index of the first action maximizing (φ(s,a)ᵀθ)².
std::size_t max_square_action(const LinearFeatures& features, std::size_t s, const Vector& theta) {
  std::size_t best_a = 0;
  double best = -1.0;
  for (std::size_t a = 0; a < features.n_actions(); ++a) {
    const double v = features.phi(s, a).dot(theta);
    if (v * v > best) {
      best = v * v;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace

double kappa_objective(const LinearFeatures& features, const Distribution& mu_s, const Policy& policy, double gamma,
                       const Vector& theta) {
  double on_policy = 0.0;
  double greedy = 0.0;
  for (std::size_t s = 0; s < features.n_states(); ++s) {
    double top = 0.0;
    for (std::size_t a = 0; a < features.n_actions(); ++a) {
      const double v = features.phi(s, a).dot(theta);
      on_policy += mu_s[s] * policy(s, a) * v * v;
      top = std::max(top, v * v);
    }
    greedy += mu_s[s] * top;
  }
  return on_policy - gamma * gamma * greedy;
}

double kappa_estimate(const LinearFeatures& features, const Mdp& mdp, const Policy& policy, double gamma,
                      std::size_t restarts, std::uint64_t seed) {
  if (restarts == 0) throw InvalidInput("kappa_estimate: need at least one restart");
  const Distribution mu = state_marginal(mdp, policy);
  const std::size_t n_s = features.n_states();
  const auto d = static_cast<Eigen::Index>(features.dim());
  const Matrix sigma = sigma_mu_pi(features, mu, policy).matrix();
  const double g2 = gamma * gamma;

  double curvature = lambda_max(SymMatrix(sigma));
  for (std::size_t s = 0; s < n_s; ++s) {
    double top = 0.0;
    for (std::size_t a = 0; a < features.n_actions(); ++a) top = std::max(top, features.phi(s, a).squaredNorm());
    curvature += g2 * mu[s] * top;
  }
  const double step = curvature > 0.0 ? 1.0 / (2.0 * curvature) : 1.0;

  auto objective = [&](const Vector& theta) { return kappa_objective(features, mu, policy, gamma, theta); };
  auto greedy_actions = [&](const Vector& theta) {
    std::vector<std::size_t> b(n_s);
    for (std::size_t s = 0; s < n_s; ++s) b[s] = max_square_action(features, s, theta);
    return b;
  };

  constexpr int kSubgradientSteps = 500;
  constexpr int kPolishRounds = 100;
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  Vector grad(d);
  for (std::size_t r = 0; r < restarts; ++r) {
    Vector theta(d);
    do {
      for (Eigen::Index i = 0; i < d; ++i) theta(i) = 2.0 * rng.uniform01() - 1.0;
    } while (theta.norm() == 0.0);
    theta.normalize();
    double f = objective(theta);
    best = std::min(best, f);

    for (int it = 0; it < kSubgradientSteps; ++it) {
      grad.noalias() = 2.0 * sigma * theta;
      for (std::size_t s = 0; s < n_s; ++s) {
        const auto phi = features.phi(s, max_square_action(features, s, theta));
        grad -= 2.0 * g2 * mu[s] * phi.dot(theta) * phi.transpose();
      }
      grad -= grad.dot(theta) * theta;  // tangent component
      Vector next = theta - step * grad;
      if (next.norm() == 0.0) break;
      next.normalize();
      const double fn = objective(next);
      theta = std::move(next);
      f = fn;
      best = std::min(best, f);
    }

    for (int round = 0; round < kPolishRounds; ++round) {
      const Matrix m = sigma - g2 * sigma_mu_b(features, mu, greedy_actions(theta)).matrix();
      const EigenDecomposition e = jacobi_eigen(SymMatrix(0.5 * (m + m.transpose())));
      const Vector v = e.vectors.col(0);
      const double fv = objective(v);
      best = std::min(best, fv);
      if (!(fv < f - 1e-15)) break;
      theta = v;
      f = fv;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// d = 1

std::string to_string(GasVerdict v) {
  switch (v) {
    case GasVerdict::GAS:
      return "GAS";
    case GasVerdict::NotGAS:
      return "NotGAS";
    case GasVerdict::Boundary:
      return "Boundary";
  }
  return "Boundary";
}

namespace {

constexpr double kSignBand = 1e-12;

// Possible signs of a value, widened to all three inside the band.
std::vector<int> readings(double v) {
  if (std::abs(v) <= kSignBand) return {-1, 0, 1};
  return {v < 0.0 ? -1 : 1};
}

bool gas_table(int hp, int hm, int r) {
  if (r == 0) return hp < 0 && hm < 0;
  if (r > 0) return hp < 0 && hm <= 0;
  return hp <= 0 && hm < 0;
}

}  // namespace

ScalarStability h_plus_minus(const LinearFeatures& features, const Mdp& mdp, const Policy& policy) {
  if (features.dim() != 1) throw InvalidInput("h_plus_minus: requires d = 1, got d = " + std::to_string(features.dim()));
  const Distribution mu = state_marginal(mdp, policy);
  const std::size_t n_s = mdp.n_states();
  const std::size_t n_a = mdp.n_actions();

  std::vector<double> hi(n_s);
  std::vector<double> lo(n_s);
  for (std::size_t s = 0; s < n_s; ++s) {
    hi[s] = lo[s] = features.phi(s, 0)(0);
    for (std::size_t a = 1; a < n_a; ++a) {
      hi[s] = std::max(hi[s], features.phi(s, a)(0));
      lo[s] = std::min(lo[s], features.phi(s, a)(0));
    }
  }

  ScalarStability out;
  for (std::size_t s = 0; s < n_s; ++s) {
    for (std::size_t a = 0; a < n_a; ++a) {
      const double w = mu[s] * policy(s, a);
      if (w == 0.0) continue;
      const double f = features.phi(s, a)(0);
      double next_hi = 0.0;
      double next_lo = 0.0;
      for (std::size_t s2 = 0; s2 < n_s; ++s2) {
        next_hi += mdp.p(a, s, s2) * hi[s2];
        next_lo += mdp.p(a, s, s2) * lo[s2];
      }
      out.h_plus += w * (mdp.gamma() * f * next_hi - f * f);
      out.h_minus += w * (mdp.gamma() * f * next_lo - f * f);
      out.r_pi += w * f * mdp.reward(s, a);
    }
  }

  bool any_gas = false;
  bool any_not = false;
  for (int hp : readings(out.h_plus))
    for (int hm : readings(out.h_minus))
      for (int r : readings(out.r_pi)) (gas_table(hp, hm, r) ? any_gas : any_not) = true;
  out.verdict = any_gas && any_not ? GasVerdict::Boundary : (any_gas ? GasVerdict::GAS : GasVerdict::NotGAS);
  return out;
}

FeasibilityVerdict full_dim_feasibility(const Mdp& mdp, const LinearFeatures& features, double gamma) {
  const std::size_t full = mdp.n_states() * mdp.n_actions();
  FeasibilityVerdict out;
  if (features.dim() != full) {
    out.reason = "d = " + std::to_string(features.dim()) + " < |S||A| = " + std::to_string(full) + "; not ruled out";
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(features.phi());
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) != full) {
    out.reason = "feature matrix is square but rank deficient; not ruled out";
    return out;
  }
  const double threshold = 1.0 / static_cast<double>(mdp.n_actions());
  if (gamma * gamma >= threshold) {
    out.infeasible = true;
    out.reason = "full-dimensional features with gamma^2 = " + std::to_string(gamma * gamma) +
                 " >= 1/|A| = " + std::to_string(threshold) + ": no behavior policy satisfies the condition";
  } else {
    out.reason = "full-dimensional features with gamma^2 < 1/|A|; not ruled out";
  }
  return out;
}

StabilityReport stability_report(const LinearFeatures& features, const Mdp& mdp, const Policy& policy,
                                 const DeltaPiOptions& options, std::size_t kappa_restarts, std::uint64_t seed) {
  StabilityReport report;
  report.gamma = mdp.gamma();
  const DeltaPiResult delta = delta_pi(features, mdp, policy, options);
  report.delta_pi = delta.value;
  report.gamma_threshold = std::sqrt(delta.value);
  report.delta_exhaustive = delta.exhaustive;
  report.minimizing_policy = delta.minimizing_policy;
  report.kappa = kappa_estimate(features, mdp, policy, mdp.gamma(), kappa_restarts, seed);
  if (features.dim() == 1) {
    const ScalarStability h = h_plus_minus(features, mdp, policy);
    report.h_plus = h.h_plus;
    report.h_minus = h.h_minus;
    report.r_pi = h.r_pi;
    report.gas_verdict = h.verdict;
  }
  const FeasibilityVerdict fd = full_dim_feasibility(mdp, features, mdp.gamma());
  report.full_dim_infeasible = fd.infeasible;
  report.full_dim_reason = fd.reason;
  return report;
}

}  // namespace salab
