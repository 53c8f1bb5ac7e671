#pragma once

#include <cstdint>
#include <string>

namespace salab {

// Step sizes ε_k: either constant, or ε / (k + h)^ξ.
class StepSchedule {
 public:
  enum class Kind { Constant, Polynomial };

  // ε ∈ (0, 1).
  static StepSchedule constant(double eps);

  // h ≥ 0, ξ ∈ (0, 1], and the first step ε / h^ξ must lie in (0, 1].
  static StepSchedule polynomial(double eps, double h, double xi);

  // "const:0.01" or "poly:eps=2,h=10,xi=1" (keys in any order).
  static StepSchedule parse(const std::string& text);

  Kind kind() const { return kind_; }
  double eps0() const { return eps_; }
  double h() const { return h_; }
  double xi() const { return xi_; }

  double eps(std::int64_t k) const;

  // Σ_{k=i}^{j} ε_k; zero when i = j + 1. Indices below zero contribute nothing.
  double partial_sum(std::int64_t i, std::int64_t j) const;

  // Inverse of parse, with round-trip precision.
  std::string to_string() const;

 private:
  StepSchedule(Kind kind, double eps, double h, double xi) : kind_(kind), eps_(eps), h_(h), xi_(xi) {}

  Kind kind_;
  double eps_;
  double h_;
  double xi_;
};

}  // namespace salab
