#pragma once

#include "sa_lab/markov.hpp"

namespace salab {

// Dense real symmetric matrix. Inputs asymmetric by more than 1e−12
// (relative to the largest entry) are rejected; the rest are symmetrized.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);

  static SymMatrix identity(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix m_;
};

// Largest eigenvalue by power iteration on m + sI, with s the smallest shift
// (from Gershgorin discs) that makes the operator positive semi-definite.
// Stops once ‖Bx − ρx‖ ≤ tol·max(1, |ρ|) for the Rayleigh quotient ρ.
double lambda_max(const SymMatrix& m, double tol = 1e-12);

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // columns, orthonormal
};

// Cyclic Jacobi rotations until the off-diagonal mass is below tol·‖m‖_F.
EigenDecomposition jacobi_eigen(const SymMatrix& m, double tol = 1e-14);

// S with S·m·S = I. Throws NotPositiveDefinite when an eigenvalue is ≤ tol.
SymMatrix inv_sqrt(const SymMatrix& m, double tol = 1e-12);

}  // namespace salab
