#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/solver.hpp"

namespace geoquant {

// Asymptotic covariance Sigma = A^-1 B A^-1 of sqrt(n)(q_hat - q):
//   A = sum_{z != q} w hess_R(z - q),
//   B = sum_{z != q} w (grad_R(q - z) - alpha u)(grad_R(q - z) - alpha u)^T.
struct SandwichEstimate {
  Eigen::MatrixXd A;      // positive definite under the theorem's hypotheses
  Eigen::MatrixXd B;      // positive semi-definite
  Eigen::MatrixXd Sigma;  // A^-1 B A^-1
  Eigen::VectorXd q;
};

// Hypothesis gate (checked mechanically, fails loudly):
//   (i) r' > 0 on a sampled grid and the measure is not a point mass,
//   or (ii) the measure is not supported on a line;
// and
//   (iii) r(0) = r'(0) = 0, or (iv) q is not an atom.
SandwichEstimate sandwich(const DiscreteMeasure& m, const Regularizer& reg,
                          const QuantileIndex& idx, const Eigen::VectorXd& q);

struct CltReport {
  std::size_t n = 0;
  int reps = 0;
  double coverage95 = 0.0;  // fraction inside the 95% chi-square ellipsoid
  // (level, empirical quantile of the Mahalanobis statistic, chi-square
  // reference quantile) triples.
  std::vector<std::array<double, 3>> mahalanobis_quantiles;
  Eigen::VectorXd oracle_q0;
  Eigen::MatrixXd sigma0;
  Eigen::MatrixXd empirical_cov;  // of sqrt(n)(q_hat - q0) across reps
  int failures = 0;
};

struct ExperimentOptions {
  std::size_t oracle_n = 1000000;  // giant-sample plug-in for the population quantile
  SolverOptions solver;
};

// Monte Carlo check of asymptotic normality: population quantile and
// covariance from one giant sample at a derived oracle seed, then reps
// independent n-samples; Mahalanobis statistics n (q_hat-q0)' Sigma0^-1
// (q_hat-q0) are compared against the chi-square reference. Requires
// reps >= 100; more than 1% solver failures invalidates the experiment.
CltReport clt_experiment(const Generator& gen, const Regularizer& reg,
                         const QuantileIndex& idx, std::size_t n, int reps,
                         std::uint64_t seed, const ExperimentOptions& opts = {});

// Mean error ||q_hat_n - q0|| per sample size.
std::vector<std::pair<std::size_t, double>> consistency_curve(
    const Generator& gen, const Regularizer& reg, const QuantileIndex& idx,
    const std::vector<std::size_t>& n_grid, int reps, std::uint64_t seed,
    const ExperimentOptions& opts = {});

// Least-squares slope of log(error) against log(n).
double loglog_slope(const std::vector<std::pair<std::size_t, double>>& curve);

enum class RatioFlag { Defined, ZeroDistance, InfiniteDistance };

struct StabilityGap {
  double sq_dist;  // || q_reg1 - q_reg2 ||^2
  double l1;       // L1 distance between the regularizers (may be inf)
  double ratio;    // sq_dist / l1 when defined
  RatioFlag flag = RatioFlag::Defined;
};

// Quantile displacement against the L1 perturbation of the regularizer.
// reg1 must be strictly increasing with r(0) = 0 (the smoothing side of
// the stability bound).
StabilityGap stability_gap(const DiscreteMeasure& m, const Regularizer& reg1,
                           const Regularizer& reg2, const QuantileIndex& idx,
                           const SolverOptions& opts = {});

}  // namespace geoquant
