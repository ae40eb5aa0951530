#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>

namespace geoquant {

// A theorem-level hypothesis required by an operation does not hold
// (support degeneracy, regularizer monotonicity, symmetry, tail finiteness).
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The objective is not differentiable at the query point, i.e.
// r(0) P[{x}] > 0. Carries the data of the directional derivative so
// callers can fall back to the first-order certificate.
class NondifferentiableError : public std::runtime_error {
 public:
  NondifferentiableError(const std::string& what, Eigen::VectorXd dist_value,
                         double atom_slack)
      : std::runtime_error(what),
        dist_value_(std::move(dist_value)),
        atom_slack_(atom_slack) {}

  const Eigen::VectorXd& dist_value() const { return dist_value_; }
  double atom_slack() const { return atom_slack_; }

 private:
  Eigen::VectorXd dist_value_;
  double atom_slack_;
};

// Numerical conditioning failure (singular Hessian where positive
// definiteness is required, failed factorization).
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geoquant
