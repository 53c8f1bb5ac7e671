#include "sa_lab/linalg.hpp"

#include "sa_lab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace salab {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidInput("SymMatrix: matrix must be square");
  if (!m_.allFinite()) throw InvalidInput("SymMatrix: non-finite entry");
  if (m_.size() == 0) return;
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidInput("SymMatrix: matrix is not symmetric");
  m_ = 0.5 * (m_ + m_.transpose()).eval();
}

SymMatrix SymMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymMatrix(Matrix::Identity(k, k));
}

double lambda_max(const SymMatrix& sym, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("lambda_max: tol must be positive");
  const Matrix& a = sym.matrix();
  const Eigen::Index n = a.rows();
  if (n == 0) throw InvalidInput("lambda_max: empty matrix");

  double gershgorin_low = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radius = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    gershgorin_low = std::min(gershgorin_low, a(i, i) - radius);
  }
  const double shift = -gershgorin_low;
  Matrix b = a;
  b.diagonal().array() += shift;

  // Fixed start with no zero entries, so no eigenvector is orthogonal to it by construction.
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(1.0 + 2.0 * static_cast<double>(i));
  x.normalize();

  constexpr std::size_t kMaxIter = 1'000'000;
  Vector y(n);
  for (std::size_t it = 0; it < kMaxIter; ++it) {
    y.noalias() = b * x;
    const double rho = x.dot(y);
    const double residual = (y - rho * x).norm();
    if (residual <= tol * std::max(1.0, std::abs(rho))) return rho - shift;
    const double norm = y.norm();
    if (norm == 0.0) return -shift;
    x = y / norm;
  }
  throw NoConvergence("lambda_max: power iteration did not converge", kMaxIter);
}

EigenDecomposition jacobi_eigen(const SymMatrix& sym, double tol) {
  Matrix a = sym.matrix();
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double target = tol * std::max(a.norm(), std::numeric_limits<double>::min());

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && off_norm() > target; ++sweep) {
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > target) throw NoConvergence("jacobi_eigen: rotations did not converge", static_cast<std::size_t>(sweep));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

SymMatrix inv_sqrt(const SymMatrix& m, double tol) {
  const EigenDecomposition e = jacobi_eigen(m);
  if (e.values.size() == 0) throw InvalidInput("inv_sqrt: empty matrix");
  if (!(e.values(0) > tol)) {
    throw NotPositiveDefinite("inv_sqrt: smallest eigenvalue " + std::to_string(e.values(0)) + " is not above tol");
  }
  const Vector scale = e.values.array().rsqrt();
  Matrix s = e.vectors * scale.asDiagonal() * e.vectors.transpose();
  return SymMatrix(0.5 * (s + s.transpose()));
}

}  // namespace salab
