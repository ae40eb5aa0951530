#include "geoquant/extremes.hpp"

#include <cmath>
#include <stdexcept>

#include "geoquant/errors.hpp"

namespace geoquant {

namespace {

double resolve_tail(const Regularizer& reg, double beta, bool allow_estimate) {
  const TailLimit tail = reg.tail_limit(beta);
  if (tail.estimate && !allow_estimate) {
    throw HypothesisError(
        "tail limit is a numeric estimate; pass the override to use it");
  }
  return tail.value;
}

}  // namespace

ExtremeCurve extreme_curve(const DiscreteMeasure& m, const Regularizer& reg,
                           const Eigen::VectorXd& u, const std::vector<double>& alphas,
                           const SolverOptions& opts, const ExtremeOptions& ext) {
  if (alphas.empty()) throw std::invalid_argument("extreme curve requires alphas");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] >= 0.5 && alphas[k] < 1.0)) {
      throw std::domain_error("extreme curve requires alphas in [0.5, 1)");
    }
    if (k > 0 && !(alphas[k] > alphas[k - 1])) {
      throw std::invalid_argument("alphas must be strictly increasing");
    }
  }

  double beta;
  if (ext.beta_override) {
    beta = *ext.beta_override;
  } else if (const auto tail = reg.recorded_tail()) {
    // Norm growth saturates at exponent 2: beyond it the covariance term
    // takes over, so the scaling uses min(recorded, 2).
    beta = std::min(tail->first, 2.0);
  } else {
    throw HypothesisError(
        "regularizer has no recorded tail exponent; pass a beta override");
  }
  const double ell = resolve_tail(reg, beta, ext.allow_estimated_tail);
  if (!std::isfinite(ell)) {
    throw HypothesisError("tail limit is infinite at beta = " + std::to_string(beta));
  }

  ExtremeCurve curve;
  curve.beta = beta;
  curve.u = u;
  SolverOptions chain = opts;
  for (const double alpha : alphas) {
    const QuantileIndex idx(alpha, u);
    const QuantileSolution sol = quantile(m, reg, idx, chain);
    if (sol.status == SolveStatus::Converged) {
      chain.start = sol.point;  // warm start the next, larger alpha
    } else {
      chain.start.reset();
    }
    ExtremeCurveRow row;
    row.alpha = alpha;
    row.norm = sol.point.norm();
    row.scaled_norm = std::pow(row.norm, beta) * (1.0 - alpha);
    const double dir_scale = std::pow(row.norm, std::min(beta, 1.0));
    row.direction_gap = row.norm > 0.0
                            ? (dir_scale * (sol.point / row.norm - alpha * u)).eval()
                            : Eigen::VectorXd::Zero(u.size()).eval();
    row.status = sol.status;
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

double predicted_norm_limit(const DiscreteMeasure& m, const Regularizer& reg,
                            const Eigen::VectorXd& u, double beta,
                            bool allow_estimated_tail) {
  if (!(beta > 0.0 && beta <= 2.0)) {
    throw std::domain_error("predicted norm limit requires beta in (0, 2]");
  }
  const double ell = resolve_tail(reg, beta, allow_estimated_tail);
  if (!std::isfinite(ell)) {
    throw HypothesisError("tail limit is infinite at beta = " + std::to_string(beta) +
                          "; use a smaller beta");
  }
  if (beta < 2.0) return ell;
  const Eigen::MatrixXd sigma = m.covariance();
  return ell + 0.5 * (sigma.trace() - u.dot(sigma * u));
}

Eigen::VectorXd direction_gap_limit(const DiscreteMeasure& m, const Regularizer& reg,
                                    const Eigen::VectorXd& u,
                                    bool allow_estimated_tail) {
  const double ell1 = resolve_tail(reg, 1.0, allow_estimated_tail);
  if (!std::isfinite(ell1)) {
    throw HypothesisError("direction gap limit requires a finite tail at beta = 1");
  }
  const Eigen::VectorXd mu = m.mean();
  return mu - u.dot(mu) * u;
}

}  // namespace geoquant
