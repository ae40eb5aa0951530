#pragma once

#include <Eigen/Core>
#include <optional>

#include "geoquant/measure.hpp"
#include "geoquant/regularizer.hpp"

namespace geoquant {

// Index (alpha, u) of a quantile: a point alpha*u of the open unit ball.
struct QuantileIndex {
  double alpha;
  Eigen::VectorXd u;  // unit direction

  QuantileIndex(double alpha_, Eigen::VectorXd u_);
  Eigen::VectorXd point() const { return alpha * u; }
  // alpha = ||v||, u = v/||v||; v = 0 maps to (0, e1).
  static QuantileIndex from_point(const Eigen::VectorXd& v);
};

// First-order optimality data at a point x:
//   residual = ||F(x) - alpha u||, atom_slack = r(0) P[{x}],
//   satisfied <=> residual <= atom_slack + tol.
struct Certificate {
  double residual = 0.0;
  double atom_slack = 0.0;
  double tol = 0.0;
  bool satisfied = false;
  // Nearest atom within 1e-9 of x (snapping aid), -1 when none.
  Eigen::Index nearby_atom = -1;
};

// Distribution function F(x) = sum_i w_i r(||x - z_i||) (x - z_i)/||x - z_i||
// over atoms z_i != x. Always has norm <= 1.
Eigen::VectorXd dist_fn(const DiscreteMeasure& m, const Regularizer& reg,
                        const Eigen::VectorXd& x);

// Objective sum_i w_i (R(x - z_i) - R(z_i)) - <alpha u, x>, where R is the
// loss primitive at norms. Finite for every x, no moment condition.
double objective(const DiscreteMeasure& m, const Regularizer& reg,
                 const QuantileIndex& idx, const Eigen::VectorXd& x);

// One-sided directional derivative of the objective at x in direction v:
//   r(0) ||v|| P[{x}] + <v, F(x) - alpha u>.
double directional_derivative(const DiscreteMeasure& m, const Regularizer& reg,
                              const QuantileIndex& idx, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v);

// Gradient F(x) - alpha u. Defined iff r(0) P[{x}] = 0; otherwise throws
// NondifferentiableError carrying (F(x), atom slack).
Eigen::VectorXd gradient(const DiscreteMeasure& m, const Regularizer& reg,
                         const QuantileIndex& idx, const Eigen::VectorXd& x);

// Hessian sum_{z_i != x} w_i loss_hessian(x - z_i), positive semi-definite.
// Throws when x is an atom and r(0) > 0 or r'(0) > 0 (undefined curvature).
Eigen::MatrixXd hessian(const DiscreteMeasure& m, const Regularizer& reg,
                        const QuantileIndex& idx, const Eigen::VectorXd& x);

// Certificate with explicit absolute tolerance (tol >= 0).
Certificate certify_quantile(const DiscreteMeasure& m, const Regularizer& reg,
                             const QuantileIndex& idx, const Eigen::VectorXd& x,
                             double tol);

// Certificate with the default relative tolerance 1e-8 (1 + ||F(x)||).
Certificate certify_quantile(const DiscreteMeasure& m, const Regularizer& reg,
                             const QuantileIndex& idx, const Eigen::VectorXd& x);

namespace detail {
// Indicator-excluded Hessian sum without the differentiability gate; the
// solver needs it at arbitrary iterates.
Eigen::MatrixXd hessian_sum(const DiscreteMeasure& m, const Regularizer& reg,
                            const Eigen::VectorXd& x);
}  // namespace detail

}  // namespace geoquant
