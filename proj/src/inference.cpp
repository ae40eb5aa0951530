#include "geoquant/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoquant/errors.hpp"
#include "geoquant/kahan.hpp"
#include "geoquant/rng.hpp"
#include "geoquant/stats.hpp"

namespace geoquant {

namespace {

bool rprime_positive_sampled(const Regularizer& reg) {
  for (int i = 0; i < 200; ++i) {
    const double s = std::pow(10.0, -6.0 + 9.0 * i / 199.0);
    if (!(reg.rprime(s) > 0.0)) return false;
  }
  return true;
}

void sandwich_gate(const DiscreteMeasure& m, const Regularizer& reg,
                   const Eigen::VectorXd& q) {
  const bool cond_i = rprime_positive_sampled(reg) && m.size() > 1;
  const bool cond_ii = !m.line_support().has_value();
  if (!cond_i && !cond_ii) {
    throw HypothesisError(
        "sandwich hypotheses fail: r' vanishes somewhere (or the measure is a "
        "point mass) and the measure is supported on a line");
  }
  const bool cond_iii = reg.r0() == 0.0 && reg.rprime0() == 0.0;
  const bool cond_iv = m.atom_mass(q) == 0.0;
  if (!cond_iii && !cond_iv) {
    throw HypothesisError(
        "sandwich hypotheses fail: the quantile is an atom and the regularizer "
        "does not satisfy r(0) = r'(0) = 0");
  }
}

}  // namespace

SandwichEstimate sandwich(const DiscreteMeasure& m, const Regularizer& reg,
                          const QuantileIndex& idx, const Eigen::VectorXd& q) {
  if (q.size() != m.dim()) throw std::invalid_argument("q has wrong dimension");
  sandwich_gate(m, reg, q);

  const Eigen::Index d = m.dim();
  const Eigen::VectorXd target = idx.alpha * idx.u;
  KahanMatrix accA(d, d), accB(d, d);
  Eigen::VectorXd diff(d), score(d);
  Eigen::MatrixXd term(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    diff = q - m.atoms().col(i);
    const double s = diff.norm();
    if (s == 0.0) continue;
    const double w = m.weight(i);
    const double radial = w * reg.r(s) / s;
    term.noalias() =
        ((w * reg.rprime(s) - radial) / (s * s)) * (diff * diff.transpose());
    term.diagonal().array() += radial;
    accA.add(term);
    score = (reg.r(s) / s) * diff - target;  // grad_R(q - z) - alpha u
    term.noalias() = w * (score * score.transpose());
    accB.add(term);
  }

  SandwichEstimate est;
  est.q = q;
  est.A = accA.value();
  est.B = accB.value();
  est.A = 0.5 * (est.A + est.A.transpose()).eval();
  est.B = 0.5 * (est.B + est.B.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.A);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConditioningError("sandwich matrix A is numerically singular");
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(est.A);
  est.Sigma = ldlt.solve(ldlt.solve(est.B).transpose());
  est.Sigma = 0.5 * (est.Sigma + est.Sigma.transpose()).eval();
  return est;
}

namespace {

Eigen::VectorXd solve_or_fail(const DiscreteMeasure& m, const Regularizer& reg,
                              const QuantileIndex& idx, const SolverOptions& opts,
                              bool* ok) {
  const QuantileSolution sol = quantile(m, reg, idx, opts);
  *ok = sol.status == SolveStatus::Converged || sol.status == SolveStatus::AtAtom;
  return sol.point;
}

struct Oracle {
  Eigen::VectorXd q0;
  DiscreteMeasure giant;
};

Oracle population_oracle(const Generator& gen, const Regularizer& reg,
                         const QuantileIndex& idx, std::uint64_t seed,
                         const ExperimentOptions& opts) {
  // Fixed oracle stream, distinct from every replicate stream.
  const std::uint64_t oracle_seed = Rng::mix(seed ^ 0xa11ce5eedull);
  DiscreteMeasure giant = gen.sample(opts.oracle_n, oracle_seed);
  bool ok = false;
  Eigen::VectorXd q0 = solve_or_fail(giant, reg, idx, opts.solver, &ok);
  if (!ok) throw std::runtime_error("oracle quantile solve did not converge");
  return {std::move(q0), std::move(giant)};
}

}  // namespace

CltReport clt_experiment(const Generator& gen, const Regularizer& reg,
                         const QuantileIndex& idx, std::size_t n, int reps,
                         std::uint64_t seed, const ExperimentOptions& opts) {
  if (reps < 100) throw std::invalid_argument("clt experiment requires reps >= 100");
  const Oracle oracle = population_oracle(gen, reg, idx, seed, opts);
  const Eigen::Index d = oracle.q0.size();

  const SandwichEstimate sand = sandwich(oracle.giant, reg, idx, oracle.q0);
  const Eigen::LDLT<Eigen::MatrixXd> sigma_ldlt(sand.Sigma);
  if (sigma_ldlt.info() != Eigen::Success) {
    throw ConditioningError("oracle covariance is not factorizable");
  }

  CltReport report;
  report.n = n;
  report.reps = reps;
  report.oracle_q0 = oracle.q0;
  report.sigma0 = sand.Sigma;

  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(reps));
  KahanMatrix cov_acc(d, d);
  Rng root(seed);
  for (int k = 0; k < reps; ++k) {
    const DiscreteMeasure sample = gen.sample(n, root.spawn(static_cast<std::uint64_t>(k) + 1).seed());
    bool ok = false;
    const Eigen::VectorXd qhat = solve_or_fail(sample, reg, idx, opts.solver, &ok);
    if (!ok) {
      ++report.failures;
      continue;
    }
    const Eigen::VectorXd delta = qhat - oracle.q0;
    stats.push_back(static_cast<double>(n) * delta.dot(sigma_ldlt.solve(delta)));
    cov_acc.add(static_cast<double>(n) * (delta * delta.transpose()));
  }
  if (report.failures > reps / 100) {
    throw std::runtime_error("clt experiment invalid: more than 1% solver failures (" +
                             std::to_string(report.failures) + "/" +
                             std::to_string(reps) + ")");
  }
  const double count = static_cast<double>(stats.size());
  report.empirical_cov = cov_acc.value() / count;

  const double threshold = chi2_quantile(static_cast<int>(d), 0.95);
  double inside = 0.0;
  for (const double s : stats) inside += (s <= threshold) ? 1.0 : 0.0;
  report.coverage95 = inside / count;

  std::sort(stats.begin(), stats.end());
  for (const double level : {0.5, 0.75, 0.9, 0.95, 0.99}) {
    const std::size_t pos = std::min(
        stats.size() - 1, static_cast<std::size_t>(level * (count - 1.0) + 0.5));
    report.mahalanobis_quantiles.push_back(
        {level, stats[pos], chi2_quantile(static_cast<int>(d), level)});
  }
  return report;
}

std::vector<std::pair<std::size_t, double>> consistency_curve(
    const Generator& gen, const Regularizer& reg, const QuantileIndex& idx,
    const std::vector<std::size_t>& n_grid, int reps, std::uint64_t seed,
    const ExperimentOptions& opts) {
  if (reps < 1) throw std::invalid_argument("consistency curve requires reps >= 1");
  const Oracle oracle = population_oracle(gen, reg, idx, seed, opts);

  std::vector<std::pair<std::size_t, double>> curve;
  Rng root(seed);
  std::uint64_t stream = 0;
  for (const std::size_t n : n_grid) {
    KahanScalar err;
    int ok_count = 0;
    for (int k = 0; k < reps; ++k) {
      const DiscreteMeasure sample = gen.sample(n, root.spawn(++stream).seed());
      bool ok = false;
      const Eigen::VectorXd qhat = solve_or_fail(sample, reg, idx, opts.solver, &ok);
      if (!ok) continue;
      ++ok_count;
      err.add((qhat - oracle.q0).norm());
    }
    if (ok_count * 100 < reps * 99) {
      throw std::runtime_error("consistency curve invalid: more than 1% failures");
    }
    curve.emplace_back(n, err.value() / ok_count);
  }
  return curve;
}

double loglog_slope(const std::vector<std::pair<std::size_t, double>>& curve) {
  if (curve.size() < 2) throw std::invalid_argument("slope requires two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(curve.size());
  for (const auto& [size, err] : curve) {
    const double x = std::log(static_cast<double>(size));
    const double y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StabilityGap stability_gap(const DiscreteMeasure& m, const Regularizer& reg1,
                           const Regularizer& reg2, const QuantileIndex& idx,
                           const SolverOptions& opts) {
  if (!(reg1.strictly_increasing() && reg1.r0() == 0.0)) {
    throw HypothesisError(
        "stability bound requires the first regularizer strictly increasing "
        "with r(0) = 0");
  }
  const QuantileSolution q1 = quantile(m, reg1, idx, opts);
  const QuantileSolution q2 = quantile(m, reg2, idx, opts);

  StabilityGap gap;
  gap.sq_dist = (q1.point - q2.point).squaredNorm();
  gap.l1 = l1_distance(reg1, reg2);
  if (std::isinf(gap.l1)) {
    gap.ratio = 0.0;
    gap.flag = RatioFlag::InfiniteDistance;
  } else if (gap.l1 == 0.0) {
    gap.ratio = 0.0;
    gap.flag = RatioFlag::ZeroDistance;
  } else {
    gap.ratio = gap.sq_dist / gap.l1;
    gap.flag = RatioFlag::Defined;
  }
  return gap;
}

}  // namespace geoquant
