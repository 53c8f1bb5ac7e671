#include "sa_lab/markov.hpp"

#include "sa_lab/error.hpp"
#include "sa_lab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace salab {

namespace {

constexpr double kNumericalZero = 1e-14;

// Boolean matrix stored as packed rows.
class BitMatrix {
 public:
  explicit BitMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= (std::uint64_t{1} << (j % 64)); }
  bool get(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }

  BitMatrix times(const BitMatrix& rhs) const {
    BitMatrix out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      std::uint64_t* dst = &out.bits_[i * words_];
      for (std::size_t j = 0; j < n_; ++j) {
        if (!get(i, j)) continue;
        const std::uint64_t* src = &rhs.bits_[j * words_];
        for (std::size_t w = 0; w < words_; ++w) dst[w] |= src[w];
      }
    }
    return out;
  }

  bool all_set() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (!get(i, j)) return false;
    return true;
  }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

double max_tv_to(const Matrix& rows, const Vector& mu) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < rows.rows(); ++x) {
    worst = std::max(worst, 0.5 * (rows.row(x).transpose() - mu).cwiseAbs().sum());
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distribution

Distribution::Distribution(Vector probabilities, double tol) : p_(std::move(probabilities)) {
  if (p_.size() == 0) throw InvalidInput("distribution must have at least one entry");
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_(i)) || p_(i) < -tol) {
      throw InvalidInput("distribution entry " + std::to_string(i) + " is negative or non-finite");
    }
    if (p_(i) < 0.0) p_(i) = 0.0;
  }
  const double mass = p_.sum();
  if (std::abs(mass - 1.0) > tol) {
    throw InvalidInput("distribution sums to " + std::to_string(mass) + ", not 1");
  }
}

Distribution Distribution::uniform(std::size_t n) {
  if (n == 0) throw InvalidInput("uniform distribution over an empty set");
  return Distribution(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw InvalidInput("point mass index out of range");
  Vector p = Vector::Zero(static_cast<Eigen::Index>(n));
  p(static_cast<Eigen::Index>(at)) = 1.0;
  return Distribution(std::move(p));
}

double detail::tv_distance_raw(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

double tv_distance(const Distribution& nu1, const Distribution& nu2) {
  if (nu1.size() != nu2.size()) {
    throw InvalidInput("tv_distance: dimension mismatch (" + std::to_string(nu1.size()) + " vs " +
                       std::to_string(nu2.size()) + ")");
  }
  return std::min(1.0, detail::tv_distance_raw(nu1.probabilities(), nu2.probabilities()));
}

// ---------------------------------------------------------------------------
// FiniteMarkovChain

FiniteMarkovChain::FiniteMarkovChain(Matrix transition, std::vector<std::string> labels, double row_tol)
    : p_(std::move(transition)), labels_(std::move(labels)) {
  if (p_.rows() < 1) throw InvalidModel("chain must have at least one state");
  if (p_.rows() != p_.cols()) throw InvalidModel("transition matrix must be square");
  for (Eigen::Index x = 0; x < p_.rows(); ++x) {
    for (Eigen::Index y = 0; y < p_.cols(); ++y) {
      const double v = p_(x, y);
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidModel("transition[" + std::to_string(x) + "][" + std::to_string(y) +
                           "] is negative or non-finite");
      }
    }
    const double mass = p_.row(x).sum();
    if (std::abs(mass - 1.0) > row_tol) {
      throw InvalidModel("transition row " + std::to_string(x) + " sums to " + std::to_string(mass));
    }
    p_.row(x) /= mass;
  }
  if (labels_.empty()) {
    labels_.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) labels_.push_back(std::to_string(i));
  } else if (labels_.size() != size()) {
    throw InvalidModel("labels has " + std::to_string(labels_.size()) + " entries for " +
                       std::to_string(size()) + " states");
  }
}

Distribution FiniteMarkovChain::row(std::size_t x) const {
  if (x >= size()) throw InvalidInput("state index out of range");
  return Distribution(p_.row(static_cast<Eigen::Index>(x)).transpose());
}

bool check_irreducible_aperiodic(const FiniteMarkovChain& chain) {
  const std::size_t n = chain.size();
  BitMatrix base(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (chain.transition()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) base.set(i, j);

  // A nonnegative matrix is primitive iff its ((n-1)^2 + 1)-th power is positive.
  std::uint64_t exponent = static_cast<std::uint64_t>(n - 1) * (n - 1) + 1;
  BitMatrix result(n);
  bool have_result = false;
  BitMatrix square = base;
  while (exponent > 0) {
    if (exponent & 1u) {
      result = have_result ? result.times(square) : square;
      have_result = true;
    }
    exponent >>= 1;
    if (exponent > 0) square = square.times(square);
  }
  return result.all_set();
}

Distribution stationary_distribution(const FiniteMarkovChain& chain, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("stationary_distribution: tol must be positive");
  if (!check_irreducible_aperiodic(chain)) {
    throw PreconditionError("stationary_distribution: chain is not irreducible and aperiodic");
  }
  const Matrix pt = chain.transition().transpose();
  const auto n = static_cast<Eigen::Index>(chain.size());
  Vector mu = Vector::Constant(n, 1.0 / static_cast<double>(n));
  constexpr std::size_t kMaxIter = 10'000'000;
  for (std::size_t it = 0; it < kMaxIter; ++it) {
    Vector next = pt * mu;
    next /= next.sum();
    const double change = detail::tv_distance_raw(next, mu);
    mu = std::move(next);
    if (change <= tol) return Distribution(mu, 1e-9);
  }
  throw NoConvergence("stationary_distribution: power iteration did not reach tol", kMaxIter);
}

// ---------------------------------------------------------------------------
// MixingProfile

MixingProfile::MixingProfile(const FiniteMarkovChain& chain, double stationary_tol)
    : p_(chain.transition()),
      mu_(stationary_distribution(chain, stationary_tol)),
      power_(Matrix::Identity(p_.rows(), p_.cols())) {
  d_.push_back(max_tv_to(power_, mu_.probabilities()));
}

void MixingProfile::extend() {
  Matrix next = power_ * p_;
  // Once P^k stops changing in floating point, d_max is frozen from here on.
  stalled_ = (next - power_).cwiseAbs().maxCoeff() == 0.0;
  power_ = std::move(next);
  d_.push_back(max_tv_to(power_, mu_.probabilities()));
}

double MixingProfile::d_max(std::size_t k) {
  while (d_.size() <= k) {
    if (stalled_) return d_.back();
    extend();
  }
  return d_[k];
}

std::size_t MixingProfile::mixing_time(double delta) {
  if (!(delta > 0.0)) throw InvalidInput("mixing_time: delta must be positive");
  for (std::size_t k = 0; k <= kMixingCap; ++k) {
    if (k >= d_.size()) {
      if (stalled_) {
        throw NumericError("mixing_time: d_max stalls at " + std::to_string(d_.back()) +
                               " above requested precision " + std::to_string(delta),
                           k);
      }
      extend();
    }
    if (d_[k] <= delta) return k;
  }
  throw NumericError("mixing_time: chain does not mix within 10^6 steps", kMixingCap);
}

std::size_t MixingProfile::t_delta(double delta, double lip) {
  if (!(delta > 0.0) || !(lip > 0.0)) throw InvalidInput("t_delta: delta and lip must be positive");
  return mixing_time(delta / (2.0 * lip));
}

double d_max(const FiniteMarkovChain& chain, std::size_t k) {
  MixingProfile profile(chain);
  return profile.d_max(k);
}

std::size_t mixing_time(const FiniteMarkovChain& chain, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("mixing_time: delta must be positive");
  MixingProfile profile(chain);
  return profile.mixing_time(delta);
}

std::size_t t_delta(const FiniteMarkovChain& chain, double delta, double lip) {
  if (!(delta > 0.0) || !(lip > 0.0)) throw InvalidInput("t_delta: delta and lip must be positive");
  MixingProfile profile(chain);
  return profile.t_delta(delta, lip);
}

// ---------------------------------------------------------------------------
// Geometric fit

double l1_constant(double c_const, double rho, double lip) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("l1_constant: rho must lie in (0,1)");
  if (!(c_const > 0.0)) throw InvalidInput("l1_constant: C must be positive");
  if (!(lip > 0.0)) throw InvalidInput("l1_constant: L must be positive");
  return std::max(1.0, std::log(2.0 * c_const * lip)) / std::log(1.0 / rho);
}

double MixingFit::l1(double lip) const { return l1_constant(c_const, rho, lip); }

MixingFit fit_geometric_mixing(MixingProfile& profile, std::size_t k_max) {
  if (k_max < 5) throw InvalidInput("fit_geometric_mixing: k_max must be at least 5");

  std::vector<double> ks;
  std::vector<double> logs;
  std::vector<double> ds;
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double d = profile.d_max(k);
    if (d > kNumericalZero) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log(d));
      ds.push_back(d);
    }
  }
  if (ks.empty()) throw DegenerateFit("fit_geometric_mixing: every d_max(k) is numerically zero");

  MixingFit fit;
  double log_c = logs.front();
  if (ks.size() == 1) {
    // Stationary after one step: any rate works, e^-1 keeps L₁ ≥ 1.
    fit.rho = std::exp(-1.0);
  } else {
    const double n = static_cast<double>(ks.size());
    const double mk = std::accumulate(ks.begin(), ks.end(), 0.0) / n;
    const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      sxy += (ks[i] - mk) * (logs[i] - ml);
      sxx += (ks[i] - mk) * (ks[i] - mk);
    }
    const double slope = sxy / sxx;
    if (!(slope < 0.0)) throw DegenerateFit("fit_geometric_mixing: d_max does not decay over the sample");
    fit.rho = std::exp(slope);
    log_c = ml - slope * mk;
  }
  if (!(fit.rho > 0.0 && fit.rho < 1.0)) throw DegenerateFit("fit_geometric_mixing: rate outside (0,1)");

  double c = std::exp(log_c);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    c = std::max(c, ds[i] / std::pow(fit.rho, ks[i] + 1.0));
  }
  fit.c_const = c;
  return fit;
}

MixingFit fit_geometric_mixing(const FiniteMarkovChain& chain, std::size_t k_max) {
  MixingProfile profile(chain);
  return fit_geometric_mixing(profile, k_max);
}

// ---------------------------------------------------------------------------
// Sampling

detail::TransitionSampler::TransitionSampler(const Matrix& transition) {
  cdf_.resize(static_cast<std::size_t>(transition.rows()));
  for (Eigen::Index x = 0; x < transition.rows(); ++x) {
    auto& row = cdf_[static_cast<std::size_t>(x)];
    row.resize(static_cast<std::size_t>(transition.cols()));
    double acc = 0.0;
    for (Eigen::Index y = 0; y < transition.cols(); ++y) {
      acc += transition(x, y);
      row[static_cast<std::size_t>(y)] = acc;
    }
  }
}

namespace {
std::size_t invert_cdf(const std::vector<double>& cdf, double u) {
  // Scale by the total so rounding in the last partial sum never leaks mass.
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) --it;
  // Skip zero-probability states that share a cumulative value.
  auto idx = static_cast<std::size_t>(it - cdf.begin());
  while (idx > 0 && cdf[idx] == cdf[idx - 1]) --idx;
  return idx;
}
}  // namespace

std::size_t detail::TransitionSampler::next(std::size_t from, double u) const {
  return invert_cdf(cdf_[from], u);
}

std::size_t detail::TransitionSampler::draw(const Vector& probabilities, double u) const {
  std::vector<double> cdf(static_cast<std::size_t>(probabilities.size()));
  std::partial_sum(probabilities.begin(), probabilities.end(), cdf.begin());
  return invert_cdf(cdf, u);
}

std::vector<std::size_t> sample_trajectory(const FiniteMarkovChain& chain, std::size_t x0,
                                           std::size_t length, std::uint64_t seed) {
  if (x0 >= chain.size()) throw InvalidInput("sample_trajectory: x0 out of range");
  std::vector<std::size_t> path;
  if (length == 0) return path;
  path.reserve(length);
  detail::TransitionSampler sampler(chain.transition());
  Rng rng(seed);
  std::size_t x = x0;
  path.push_back(x);
  while (path.size() < length) {
    x = sampler.next(x, rng.uniform01());
    path.push_back(x);
  }
  return path;
}

}  // namespace salab
