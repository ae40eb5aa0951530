#pragma once

#include <Eigen/Core>
#include <vector>

#include "geoquant/core.hpp"
#include "geoquant/solver.hpp"

namespace geoquant {

// Ball of quantile indices captured by an atom: every alpha u inside is
// solved by the atom itself.
struct BlackHole {
  Eigen::VectorXd atom;
  Eigen::VectorXd center;  // F(atom)
  double radius;           // r(0) P[{atom}]
};

// One black hole per atom (empty when r(0) = 0). Requires the uniqueness
// regime: measure not supported on a line, or regularizer strictly
// increasing. Verifies the containment and disjointness inequalities and
// throws on violation beyond 1e-12 slack.
std::vector<BlackHole> black_holes(const DiscreteMeasure& m, const Regularizer& reg);

struct RankSpacing {
  double min_gap;    // min over atom pairs of ||F(x_i) - F(x_j)||
  double bound;      // min over pairs of r(0)(P{x_i} + P{x_j})
  bool pass;         // min_gap > bound, with 1e-12 slack
  bool at_boundary;  // |min_gap - bound| <= 1e-12: strictness undecidable
};

// Equi-spacing of the ranks F(x_i); bound is 2 r(0)/n for uniform weights.
// Fewer than two atoms yields min_gap = +infinity.
RankSpacing rank_spacing(const DiscreteMeasure& m, const Regularizer& reg);

struct VolumeFraction {
  double value;      // Lebesgue fraction of the unit ball outside all holes
  bool generalized;  // true when weights are not uniform
};

// 1 - r(0)^d / n^(d-1) for uniform weights; 1 - sum (r(0) w_i)^d otherwise
// (flagged as generalized).
VolumeFraction volume_fraction(const DiscreteMeasure& m, const Regularizer& reg);

// || q(transform(m, O, b), (alpha, O u)) - (O q(m, idx) + b) ||; both sides
// solved independently. Zero up to solver tolerance by equivariance.
double equivariance_residual(const DiscreteMeasure& m, const Regularizer& reg,
                             const QuantileIndex& idx, const Eigen::MatrixXd& O,
                             const Eigen::VectorXd& b, const SolverOptions& opts = {});

}  // namespace geoquant
