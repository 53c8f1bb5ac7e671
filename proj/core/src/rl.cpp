#include "sa_lab/rl.hpp"

#include "sa_lab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace salab {

namespace {

constexpr double kRowTol = 1e-9;

void check_stochastic_rows(Matrix& m, const std::string& what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c)) || m(r, c) < 0.0) {
        throw InvalidModel(what + "[" + std::to_string(r) + "][" + std::to_string(c) + "] is negative or non-finite");
      }
    }
    const double mass = m.row(r).sum();
    if (std::abs(mass - 1.0) > kRowTol) {
      throw InvalidModel(what + " row " + std::to_string(r) + " sums to " + std::to_string(mass));
    }
    m.row(r) /= mass;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Mdp

Mdp::Mdp(std::vector<Matrix> transitions, Matrix reward, double gamma, std::optional<double> r_max)
    : p_(std::move(transitions)), reward_(std::move(reward)), gamma_(gamma) {
  if (reward_.rows() < 1 || reward_.cols() < 1) throw InvalidModel("mdp: need at least one state and one action");
  if (p_.size() != n_actions()) {
    throw InvalidModel("mdp: " + std::to_string(p_.size()) + " transition matrices for " +
                       std::to_string(n_actions()) + " actions");
  }
  for (std::size_t a = 0; a < p_.size(); ++a) {
    if (p_[a].rows() != reward_.rows() || p_[a].cols() != reward_.rows()) {
      throw InvalidModel("mdp: transition[" + std::to_string(a) + "] must be |S|x|S|");
    }
    check_stochastic_rows(p_[a], "transition[" + std::to_string(a) + "]");
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw InvalidModel("mdp: gamma must lie in (0,1)");
  if (!reward_.allFinite() || reward_.minCoeff() < 0.0) throw InvalidModel("mdp: rewards must be finite and nonnegative");
  r_max_ = r_max.value_or(reward_.maxCoeff());
  if (!(r_max_ >= 0.0) || reward_.maxCoeff() > r_max_) throw InvalidModel("mdp: rewards exceed r_max");
}

Mdp Mdp::with_gamma(double gamma) const { return Mdp(p_, reward_, gamma, r_max_); }

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw InvalidModel("policy: empty probability matrix");
  check_stochastic_rows(probs_, "policy");
}

Policy Policy::uniform(std::size_t n_states, std::size_t n_actions) {
  if (n_states == 0 || n_actions == 0) throw InvalidModel("policy: empty state or action set");
  return Policy(Matrix::Constant(static_cast<Eigen::Index>(n_states), static_cast<Eigen::Index>(n_actions),
                                 1.0 / static_cast<double>(n_actions)));
}

Policy Policy::deterministic(const std::vector<std::size_t>& actions, std::size_t n_actions) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), static_cast<Eigen::Index>(n_actions));
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= n_actions) throw InvalidModel("policy: action index out of range");
    p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(actions[s])) = 1.0;
  }
  return Policy(std::move(p));
}

std::size_t Policy::action(std::size_t s) const {
  for (std::size_t a = 0; a < n_actions(); ++a) {
    if ((*this)(s, a) == 1.0) return a;
  }
  throw InvalidInput("policy is not deterministic at state " + std::to_string(s));
}

// ---------------------------------------------------------------------------
// LinearFeatures

LinearFeatures::LinearFeatures(Matrix phi, std::size_t n_states, std::size_t n_actions, RankPolicy rank)
    : phi_(std::move(phi)), n_states_(n_states), n_actions_(n_actions) {
  if (n_states_ == 0 || n_actions_ == 0) throw InvalidModel("features: empty state or action set");
  if (static_cast<std::size_t>(phi_.rows()) != n_states_ * n_actions_) {
    throw InvalidModel("features: phi has " + std::to_string(phi_.rows()) + " rows, expected |S||A| = " +
                       std::to_string(n_states_ * n_actions_));
  }
  if (phi_.cols() < 1) throw InvalidModel("features: dimension d must be at least 1");
  if (!phi_.allFinite()) throw InvalidModel("features: phi has non-finite entries");
  if (rank == RankPolicy::Require) {
    Eigen::ColPivHouseholderQR<Matrix> qr(phi_);
    qr.setThreshold(1e-10);
    if (qr.rank() != phi_.cols()) {
      throw InvalidModel("features: columns are linearly dependent (rank " + std::to_string(qr.rank()) + " < d = " +
                         std::to_string(phi_.cols()) + ")");
    }
  }
  rows_ = phi_;
  max_row_norm_ = phi_.rowwise().norm().maxCoeff();
}

LinearFeatures LinearFeatures::normalized_copy() const {
  if (!(max_row_norm_ > 0.0)) throw InvalidModel("features: cannot normalize an all-zero feature matrix");
  return LinearFeatures(phi_ / max_row_norm_, n_states_, n_actions_, RankPolicy::Allow);
}

// ---------------------------------------------------------------------------
// Chains

namespace {
void check_compatible(const Mdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw InvalidModel("policy shape does not match the MDP");
  }
}
}  // namespace

InducedChain induced_chain(const Mdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  const std::size_t n_s = mdp.n_states();
  const std::size_t n_a = mdp.n_actions();

  std::vector<Triple> triples;
  // index_of[(s·|A| + a)·|S| + s′], or npos for excluded triples
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index_of(n_s * n_a * n_s, npos);
  for (std::size_t s = 0; s < n_s; ++s) {
    for (std::size_t a = 0; a < n_a; ++a) {
      if (!(policy(s, a) > 0.0)) continue;
      for (std::size_t s2 = 0; s2 < n_s; ++s2) {
        if (!(mdp.p(a, s, s2) > 0.0)) continue;
        index_of[(s * n_a + a) * n_s + s2] = triples.size();
        triples.push_back({s, a, s2});
      }
    }
  }
  if (triples.empty()) throw InvalidModel("induced chain: no (s, a, s') triple has positive probability");

  const auto n = static_cast<Eigen::Index>(triples.size());
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t s = triples[static_cast<std::size_t>(i)].s_next;
    for (std::size_t a = 0; a < n_a; ++a) {
      const double pa = policy(s, a);
      if (!(pa > 0.0)) continue;
      for (std::size_t s2 = 0; s2 < n_s; ++s2) {
        const double q = mdp.p(a, s, s2);
        if (!(q > 0.0)) continue;
        p(i, static_cast<Eigen::Index>(index_of[(s * n_a + a) * n_s + s2])) = pa * q;
      }
    }
  }
  std::vector<std::string> labels;
  labels.reserve(triples.size());
  for (const auto& t : triples) {
    labels.push_back(std::to_string(t.s) + "," + std::to_string(t.a) + "," + std::to_string(t.s_next));
  }
  return {FiniteMarkovChain(std::move(p), std::move(labels)), std::move(triples)};
}

FiniteMarkovChain state_chain(const Mdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
    p += policy.probs().col(static_cast<Eigen::Index>(a)).asDiagonal() * mdp.transition(a);
  }
  return FiniteMarkovChain(std::move(p));
}

// ---------------------------------------------------------------------------
// Update map

namespace {
double max_next_value(const LinearFeatures& features, std::size_t s_next, const Vector& theta) {
  double best = features.phi(s_next, 0).dot(theta);
  for (std::size_t a = 1; a < features.n_actions(); ++a) best = std::max(best, features.phi(s_next, a).dot(theta));
  return best;
}
}  // namespace

void q_update_value(const LinearFeatures& features, const Mdp& mdp, const Triple& x, const Vector& theta, Vector& out) {
  const auto f = features.phi(x.s, x.a);
  const double td = mdp.reward(x.s, x.a) + mdp.gamma() * max_next_value(features, x.s_next, theta) - f.dot(theta);
  out = td * f.transpose();
}

Vector q_update_value(const LinearFeatures& features, const Mdp& mdp, const Triple& x, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != features.dim()) throw InvalidInput("q_update_value: wrong dimension");
  Vector out(theta.size());
  q_update_value(features, mdp, x, theta, out);
  return out;
}

double lipschitz_constant(const Mdp& mdp) { return 1.0 + mdp.gamma() + mdp.r_max(); }

// ---------------------------------------------------------------------------
// QProblem

QProblem QProblem::build(Mdp mdp, Policy policy, LinearFeatures features) {
  if (features.n_states() != mdp.n_states() || features.n_actions() != mdp.n_actions()) {
    throw InvalidModel("features shape does not match the MDP");
  }
  InducedChain induced = induced_chain(mdp, policy);
  if (!check_irreducible_aperiodic(induced.chain)) {
    throw PreconditionError("induced (s, a, s') chain is not irreducible and aperiodic");
  }
  Distribution mu = stationary_distribution(state_chain(mdp, policy));
  const double m = lipschitz_constant(mdp);
  return QProblem{std::move(mdp), std::move(policy), std::move(features), std::move(induced), std::move(mu), m,
                  std::nullopt};
}

Vector q_mean_update(const QProblem& qp, const Vector& theta) {
  const LinearFeatures& ft = qp.features;
  if (static_cast<std::size_t>(theta.size()) != ft.dim()) throw InvalidInput("q_mean_update: wrong dimension");
  const std::size_t n_s = qp.mdp.n_states();
  const std::size_t n_a = qp.mdp.n_actions();
  const Vector q = ft.phi() * theta;
  Vector v(static_cast<Eigen::Index>(n_s));
  for (std::size_t s = 0; s < n_s; ++s) {
    v(static_cast<Eigen::Index>(s)) = q.segment(static_cast<Eigen::Index>(s * n_a), static_cast<Eigen::Index>(n_a)).maxCoeff();
  }
  Vector weighted_td(static_cast<Eigen::Index>(n_s * n_a));
  for (std::size_t s = 0; s < n_s; ++s) {
    for (std::size_t a = 0; a < n_a; ++a) {
      const auto r = static_cast<Eigen::Index>(ft.row(s, a));
      const double next = qp.mdp.transition(a).row(static_cast<Eigen::Index>(s)).dot(v);
      const double td = qp.mdp.reward(s, a) + qp.mdp.gamma() * next - q(r);
      weighted_td(r) = qp.state_marginal[s] * qp.policy(s, a) * td;
    }
  }
  return ft.phi().transpose() * weighted_td;
}

SaProblem to_sa_problem(const QProblem& qp, std::optional<double> kappa) {
  std::optional<double> drift;
  if (kappa && *kappa > 0.0) drift = *kappa / 2.0;
  UpdateMap f = [features = qp.features, mdp = qp.mdp, triples = qp.induced.triples](
                    std::size_t x, const Vector& theta, Vector& out) {
    q_update_value(features, mdp, triples[x], theta, out);
  };
  return SaProblem(qp.induced.chain, qp.features.dim(), std::move(f), qp.m, drift, qp.theta_star);
}

Vector solve_theta_star(const QProblem& qp, double step, double tol, std::size_t max_iter) {
  if (!(step > 0.0) || !(tol > 0.0)) throw InvalidInput("solve_theta_star: step and tol must be positive");
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(qp.features.dim()));
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector g = q_mean_update(qp, theta);
    if (g.norm() <= tol) return theta;
    theta += step * g;
    if (!theta.allFinite() || theta.norm() > 1e6) {
      throw NoConvergence("solve_theta_star: iterate norm exceeded 1e6; the stability condition likely fails", it);
    }
  }
  throw NoConvergence("solve_theta_star: no convergence within max_iter", max_iter);
}

Policy greedy_policy(const LinearFeatures& features, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != features.dim()) throw InvalidInput("greedy_policy: wrong dimension");
  std::vector<std::size_t> actions(features.n_states(), 0);
  for (std::size_t s = 0; s < features.n_states(); ++s) {
    double best = features.phi(s, 0).dot(theta);
    for (std::size_t a = 1; a < features.n_actions(); ++a) {
      const double v = features.phi(s, a).dot(theta);
      if (v > best) {
        best = v;
        actions[s] = a;
      }
    }
  }
  return Policy::deterministic(actions, features.n_actions());
}

}  // namespace salab
