#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/solver.hpp"

namespace geoquant {

struct ExtremeCurveRow {
  double alpha;
  double norm;                    // ||q||
  double scaled_norm;             // ||q||^beta (1 - alpha)
  Eigen::VectorXd direction_gap;  // ||q||^min(beta,1) (q/||q|| - alpha u)
  SolveStatus status;
};

struct ExtremeCurve {
  std::vector<ExtremeCurveRow> rows;
  double beta;       // tail exponent used for the scalings
  Eigen::VectorXd u;
};

struct ExtremeOptions {
  // Overrides the regularizer's recorded tail exponent.
  std::optional<double> beta_override;
  // Permit flagged numeric tail estimates (Custom regularizers).
  bool allow_estimated_tail = false;
};

// Solves the quantile at each alpha (warm-started along the increasing
// grid) and tabulates the norm scalings of the extreme regime. Requires
// alphas in [0.5, 1), strictly increasing, and a finite tail limit at the
// exponent used. The default exponent is the regularizer's recorded tail
// capped at 2, where the norm growth saturates.
ExtremeCurve extreme_curve(const DiscreteMeasure& m, const Regularizer& reg,
                           const Eigen::VectorXd& u, const std::vector<double>& alphas,
                           const SolverOptions& opts = {},
                           const ExtremeOptions& ext = {});

// Limit of ||q||^beta (1 - alpha) as alpha -> 1: ell(beta) for beta < 2;
// ell(2) + (Tr(Sigma) - u' Sigma u)/2 for beta = 2, with Sigma the weighted
// covariance of the measure. Requires beta in (0, 2] and a finite tail.
double predicted_norm_limit(const DiscreteMeasure& m, const Regularizer& reg,
                            const Eigen::VectorXd& u, double beta,
                            bool allow_estimated_tail = false);

// Limit of ||q|| (q/||q|| - u): E[Z - <Z,u> u], exact over atoms. Requires
// ell(1) finite.
Eigen::VectorXd direction_gap_limit(const DiscreteMeasure& m, const Regularizer& reg,
                                    const Eigen::VectorXd& u,
                                    bool allow_estimated_tail = false);

}  // namespace geoquant
