#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoquant/core.hpp"

namespace geoquant {

enum class SolveStatus { Converged, AtAtom, DegenerateLine, MaxIterations };

std::string to_string(SolveStatus s);

struct TracePoint {
  Eigen::VectorXd point;
  double objective;
  double residual;
};

// One-dimensional reduction data when the quantile may be non-unique
// (measure on a line with direction parallel to u, regularizer not
// strictly increasing).
struct LineReduction {
  Eigen::VectorXd base;
  Eigen::VectorXd direction;
  std::vector<double> projected_atoms;  // <direction, z_i - base>
  std::vector<double> weights;
};

struct QuantileSolution {
  Eigen::VectorXd point;
  Certificate certificate;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  std::vector<TracePoint> trace;  // filled when SolverOptions::keep_trace
  std::optional<LineReduction> line_reduction;
};

struct SolverOptions {
  double grad_tol = 1e-10;  // relative: tolerance is grad_tol (1 + ||F||)
  int max_iter = 200;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double hessian_ridge = 1e-12;  // scaled by trace(H)/d
  std::optional<Eigen::VectorXd> start;  // default: componentwise median
  bool keep_trace = false;
  int threads = 1;                // contour arc parallelism
  double line_support_tol = 1e-12;
  // Precomputed F(atom_i) columns for atom screening; contour and curve
  // drivers share one table across solves.
  std::shared_ptr<const Eigen::MatrixXd> atom_ranks;
};

// The r-quantile of order idx.alpha in direction idx.u: atoms are screened
// first via the first-order certificate when r(0) > 0 (black-hole capture),
// then a damped Newton iteration solves F(x) = alpha u from the
// componentwise median. Measures on a line parallel to u with a
// non-strictly-increasing regularizer reduce to a one-dimensional root
// search and report DegenerateLine.
QuantileSolution quantile(const DiscreteMeasure& m, const Regularizer& reg,
                          const QuantileIndex& idx, const SolverOptions& opts = {});

struct Box {
  Eigen::VectorXd lo, hi;
};

// Grid argmin of the objective over the box; test oracle only. Refuses
// d > 3 and resolution < 11.
Eigen::VectorXd brute_force_quantile(const DiscreteMeasure& m, const Regularizer& reg,
                                     const QuantileIndex& idx, const Box& bounds,
                                     int resolution);

struct ContourEntry {
  Eigen::VectorXd u;
  QuantileSolution solution;
  std::string error;  // nonempty when this direction failed
};

// Quantile contour over n_dirs equally spaced directions (d = 2). Solves
// warm-start from the neighboring direction; with opts.threads > 1 the
// circle is chunked into arcs solved in parallel, sequential within each
// arc. Per-direction failures are recorded, not propagated.
std::vector<ContourEntry> contour(const DiscreteMeasure& m, const Regularizer& reg,
                                  double alpha, int n_dirs,
                                  const SolverOptions& opts = {});

// Contour over caller-supplied directions (required for d >= 3).
std::vector<ContourEntry> contour(const DiscreteMeasure& m, const Regularizer& reg,
                                  double alpha,
                                  const std::vector<Eigen::VectorXd>& directions,
                                  const SolverOptions& opts = {});

// || Q(F(x)) - x ||: solves the quantile at index F(x) and reports the
// round-trip distance. Requires ||F(x)|| < 1 and x away from atoms when
// r(0) > 0.
double inverse_roundtrip(const DiscreteMeasure& m, const Regularizer& reg,
                         const Eigen::VectorXd& x, const SolverOptions& opts = {});

// Radial quantile profile Q(alpha) for a spherically symmetric measure:
// zero for alpha <= r(0) P[{0}], otherwise the bisection root of
// phi(lambda) = alpha where phi(lambda) is the radial component of
// F(lambda e1). The symmetry precondition is checked to 1e-9 (central
// symmetry; for d = 2 also rotation invariance of each norm shell).
double radial_profile(const DiscreteMeasure& m, const Regularizer& reg, double alpha);

}  // namespace geoquant
