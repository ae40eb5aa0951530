#include "geoquant/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "geoquant/errors.hpp"

namespace geoquant {

namespace {

void require_uniqueness_regime(const DiscreteMeasure& m, const Regularizer& reg) {
  if (reg.strictly_increasing()) return;
  if (!m.line_support()) return;
  throw HypothesisError(
      "quantiles may be non-unique: measure is supported on a line and the "
      "regularizer is not strictly increasing");
}

}  // namespace

std::vector<BlackHole> black_holes(const DiscreteMeasure& m, const Regularizer& reg) {
  require_uniqueness_regime(m, reg);
  if (reg.r0() == 0.0) return {};

  std::vector<BlackHole> holes;
  holes.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    BlackHole hole;
    hole.atom = m.atom(i);
    hole.center = dist_fn(m, reg, hole.atom);
    hole.radius = reg.r0() * m.weight(i);
    // Closed subset of the open unit ball.
    if (hole.center.norm() + hole.radius >= 1.0 + 1e-12) {
      throw std::logic_error("black hole escapes the unit ball");
    }
    holes.push_back(std::move(hole));
  }
  // Disjointness: gap = ||F(x)-F(y)|| - r(0)(P{x}+P{y}) > 0.
  for (std::size_t i = 0; i < holes.size(); ++i) {
    for (std::size_t j = i + 1; j < holes.size(); ++j) {
      const double gap =
          (holes[i].center - holes[j].center).norm() - holes[i].radius - holes[j].radius;
      if (gap <= -1e-12) {
        throw std::logic_error("black holes overlap: rank gap " + std::to_string(gap));
      }
    }
  }
  return holes;
}

RankSpacing rank_spacing(const DiscreteMeasure& m, const Regularizer& reg) {
  RankSpacing out{std::numeric_limits<double>::infinity(), 0.0, true, false};
  if (m.size() < 2) return out;  // degenerate before any regime question
  require_uniqueness_regime(m, reg);

  Eigen::MatrixXd ranks(m.dim(), m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    ranks.col(i) = dist_fn(m, reg, m.atom(i));
  }
  out.bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    for (Eigen::Index j = i + 1; j < m.size(); ++j) {
      out.min_gap = std::min(out.min_gap, (ranks.col(i) - ranks.col(j)).norm());
      out.bound = std::min(out.bound, reg.r0() * (m.weight(i) + m.weight(j)));
    }
  }
  out.at_boundary = std::abs(out.min_gap - out.bound) <= 1e-12;
  out.pass = out.min_gap > out.bound - 1e-12;
  return out;
}

VolumeFraction volume_fraction(const DiscreteMeasure& m, const Regularizer& reg) {
  const double n = static_cast<double>(m.size());
  const double d = static_cast<double>(m.dim());
  const bool uniform =
      (m.weights().array() - 1.0 / n).abs().maxCoeff() <= 1e-12;
  if (uniform) {
    return {1.0 - std::pow(reg.r0(), d) / std::pow(n, d - 1.0), false};
  }
  double covered = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    covered += std::pow(reg.r0() * m.weight(i), d);
  }
  return {1.0 - covered, true};
}

double equivariance_residual(const DiscreteMeasure& m, const Regularizer& reg,
                             const QuantileIndex& idx, const Eigen::MatrixXd& O,
                             const Eigen::VectorXd& b, const SolverOptions& opts) {
  const DiscreteMeasure pushed = m.transform(O, b);
  const QuantileIndex pushed_idx(idx.alpha, O * idx.u);
  const QuantileSolution lhs = quantile(pushed, reg, pushed_idx, opts);
  const QuantileSolution rhs = quantile(m, reg, idx, opts);
  return (lhs.point - (O * rhs.point + b)).norm();
}

}  // namespace geoquant
